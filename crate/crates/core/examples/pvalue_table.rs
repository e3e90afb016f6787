//! p-values for every graph and applicable sampler at desk scale
//! (s = 5,000, q = 9,999).

use gwtest::experiment::{cmd_test, ExperimentConfig, Preset, SamplerKind};
use gwtest::graph::benchmark_graph;

fn main() -> gwtest::Result<()> {
    println!("graph  sampler  r   p-value");
    for name in ["a", "b", "c", "d"] {
        for sampler in [SamplerKind::Claimed, SamplerKind::Exact] {
            let decomposable = benchmark_graph(name).expect("benchmark graph").is_decomposable();
            if sampler == SamplerKind::Exact && !decomposable {
                continue;
            }
            let config = ExperimentConfig::benchmark(name, sampler)?.with_preset(Preset::Desk);
            let out = cmd_test(&config)?;
            println!("({name})    {sampler:<7}  {:<2}  {:.4}", config.r(), out.report.p_value);
        }
    }
    Ok(())
}
