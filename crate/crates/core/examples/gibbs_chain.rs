//! A clique-wise Gibbs chain on graph (a) under the random-update and
//! random-permutation kernels, started from an exact draw.

use std::sync::Arc;

use gwtest::graph::benchmark_graph;
use gwtest::gwishart::{clique_kernels, ExactSampler, GWishartParams};
use gwtest::matrix::ConstrainedMatrix;
use gwtest::mcmc::{random_permutation_kernel, random_update_kernel, run_chain, Kernel, Record};
use gwtest::ptest::summary_logdet;
use gwtest::RngStream;

fn parts(params: &GWishartParams) -> gwtest::Result<Vec<Box<dyn Kernel<ConstrainedMatrix>>>> {
    Ok(clique_kernels(params)?
        .into_iter()
        .map(|k| Box::new(k) as Box<dyn Kernel<ConstrainedMatrix>>)
        .collect())
}

fn main() -> gwtest::Result<()> {
    let graph = Arc::new(benchmark_graph("a").expect("benchmark graph"));
    let params = GWishartParams::with_identity(10.0, graph)?;
    let start = ExactSampler::new(&params)?.sample(&mut RngStream::substream(3, 0))?;

    let kernels: [Box<dyn Kernel<ConstrainedMatrix>>; 2] = [
        Box::new(random_update_kernel(parts(&params)?)?),
        Box::new(random_permutation_kernel(parts(&params)?)?),
    ];
    for kernel in kernels {
        let mut rng = RngStream::substream(3, 1);
        let trace = run_chain(start.clone(), kernel.as_ref(), 12, &mut rng, Record::All, 0)?;
        let path: Vec<String> = trace
            .states
            .iter()
            .map(|q| summary_logdet(q).map(|v| format!("{v:.3}")))
            .collect::<gwtest::Result<_>>()?;
        println!("{}: ln|Q| = {}", kernel.name(), path.join(" "));
    }
    Ok(())
}
