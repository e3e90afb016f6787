//! Mean and standard deviation of ln|Q| along the chains for the claimed
//! sampler on graph (b). The drop in spread after one step is the first sign
//! that the starting law is not the target.

use gwtest::experiment::{cmd_trace, ExperimentConfig, SamplerKind, Summary};

fn main() -> gwtest::Result<()> {
    let mut config = ExperimentConfig::benchmark("b", SamplerKind::Claimed)?;
    config.s = 10_000;
    config.summaries = vec![Summary::LogDet];
    let (stats, _) = cmd_trace(&config)?;
    println!("step  mean      sd");
    for step in 0..=config.r() {
        let row = stats.row(step, Summary::LogDet).expect("every step is recorded");
        println!("{step:>4}  {:.4}  {:.4}", row.mean, row.sd);
    }
    Ok(())
}
