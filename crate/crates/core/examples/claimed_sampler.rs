//! The claimed fixed-point sampler on the non-decomposable graph (d): each
//! draw reports how many scaling sweeps it needed.

use std::collections::BTreeMap;
use std::sync::Arc;

use gwtest::graph::benchmark_graph;
use gwtest::gwishart::{ClaimedOptions, ClaimedSampler, GWishartParams};
use gwtest::RngStream;

fn main() -> gwtest::Result<()> {
    let graph = Arc::new(benchmark_graph("d").expect("benchmark graph"));
    let params = GWishartParams::with_identity(10.0, graph)?;
    let sampler = ClaimedSampler::new(&params, ClaimedOptions::default())?;

    let mut sweeps = BTreeMap::new();
    let mut not_converged = 0;
    for k in 0..1000 {
        let (_, info) = sampler.sample(&mut RngStream::substream(11, k))?;
        *sweeps.entry(info.sweeps).or_insert(0usize) += 1;
        if !info.converged {
            not_converged += 1;
        }
    }
    println!("sweeps  count");
    for (s, count) in sweeps {
        println!("{s:>6}  {count}");
    }
    println!("not converged: {not_converged} of 1000");
    Ok(())
}
