//! Exact G-Wishart draws on a decomposable graph. The Schur complement of a
//! clique is Wishart, so its mean is known in closed form.

use std::sync::Arc;

use gwtest::graph::benchmark_graph;
use gwtest::gwishart::{ExactSampler, GWishartParams};
use gwtest::matrix::{schur_complement, to_csv};
use gwtest::RngStream;
use nalgebra::DMatrix;

fn main() -> gwtest::Result<()> {
    let graph = Arc::new(benchmark_graph("a").expect("benchmark graph"));
    let params = GWishartParams::with_identity(10.0, graph)?;
    let sampler = ExactSampler::new(&params)?;
    let mut rng = RngStream::substream(7, 0);

    let first = sampler.sample(&mut rng)?;
    println!("one draw on graph (a):\n{}", to_csv(first.matrix()));

    let n = 20_000;
    let mut sum = DMatrix::zeros(3, 3);
    for _ in 0..n {
        sum += schur_complement(sampler.sample(&mut rng)?.matrix(), &[1, 2, 3])?.as_matrix();
    }
    println!("mean Schur complement of {{1,2,3}} over {n} draws (expect 12 I):{:.3}", sum / n as f64);
    Ok(())
}
