use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gwtest::experiment::{
    calibrate, cmd_ecdf, cmd_sample, cmd_test, cmd_trace, read_scale_matrix, resolve_graph,
    ExperimentConfig, KernelKind, Preset, SamplerKind, Summary,
};
use gwtest::gwishart::FixedPointInit;
use gwtest::Error;

#[derive(Parser)]
#[command(name = "gwtest", version, about = "Permutation tests for claimed exact G-Wishart samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write independent draws from a sampler.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Number of draws.
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Per-step mean and standard deviation of summaries across chains.
    Trace(Common),
    /// Empirical CDFs of summaries at the first and last chain step.
    Ecdf(Common),
    /// Run the exchangeability permutation test.
    Test {
        #[command(flatten)]
        common: Common,
        /// Also write every resampled statistic to this CSV file.
        #[arg(long)]
        dump_resamples: Option<PathBuf>,
    },
    /// Repeat the test with independent seeds and check p-value uniformity.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        runs: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Benchmark graph a, b, c, d or a graph text file.
    #[arg(long, alias = "graph-file")]
    graph: Option<String>,
    /// claimed or exact.
    #[arg(long)]
    sampler: Option<SamplerKind>,
    /// Shape parameter delta (default 10).
    #[arg(long)]
    delta: Option<f64>,
    /// Scale matrix D as a matrix CSV file (default identity).
    #[arg(long)]
    d: Option<PathBuf>,
    /// Number of chains.
    #[arg(long)]
    s: Option<usize>,
    /// Steps per chain (default three times the number of maximal cliques).
    #[arg(long)]
    r: Option<usize>,
    /// Number of resamples.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// ru (random update) or rp (random permutation sweep).
    #[arg(long, default_value = "ru")]
    kernel: KernelKind,
    /// paper (s=10000, q=999999) or desk (s=5000, q=9999).
    #[arg(long)]
    preset: Option<Preset>,
    /// Summary h(Q): logdet, logtrace or element(i,j). Repeatable; the test uses the first.
    #[arg(long = "summary")]
    summaries: Vec<Summary>,
    /// Starting iterate of the claimed sampler: wishart-zeroed or identity.
    #[arg(long, default_value = "wishart-zeroed")]
    fp_init: FixedPointInit,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Per-command fallbacks for flags left unset.
struct Defaults {
    graph: &'static str,
    sampler: SamplerKind,
    preset: Preset,
    s: Option<usize>,
    q: Option<usize>,
}

const RUN_DEFAULTS: Defaults = Defaults {
    graph: "a",
    sampler: SamplerKind::Claimed,
    preset: Preset::Paper,
    s: None,
    q: None,
};

const CALIBRATE_DEFAULTS: Defaults = Defaults {
    graph: "a",
    sampler: SamplerKind::Exact,
    preset: Preset::Paper,
    s: Some(500),
    q: Some(999),
};

impl Common {
    fn config(&self, defaults: &Defaults) -> Result<ExperimentConfig, Error> {
        let (label, graph) = resolve_graph(self.graph.as_deref().unwrap_or(defaults.graph))?;
        let mut c = ExperimentConfig::new(label, graph, self.sampler.unwrap_or(defaults.sampler))
            .with_preset(self.preset.unwrap_or(defaults.preset));
        if self.preset.is_none() {
            c.s = defaults.s.unwrap_or(c.s);
            c.q = defaults.q.unwrap_or(c.q);
        }
        if let Some(path) = &self.d {
            c.d = read_scale_matrix(path)?;
            c.d_label = path.display().to_string();
        }
        c.delta = self.delta.unwrap_or(c.delta);
        c.s = self.s.unwrap_or(c.s);
        c.q = self.q.unwrap_or(c.q);
        c.r = self.r;
        c.seed = self.seed;
        c.kernel = self.kernel;
        c.fp_init = self.fp_init;
        if let Some(&first) = self.summaries.first() {
            c.summaries = self.summaries.clone();
            c.test_summary = first;
        }
        // validates delta, D and the graph together
        c.params()?;
        Ok(c)
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sample { common, n } => {
            let config = common.config(&RUN_DEFAULTS)?;
            let out = cmd_sample(&config, n)?;
            let path = write(&common.out, "draws.csv", &out.draws_csv())?;
            println!("wrote {} draws to {}", out.draws.len(), path.display());
            if let Some(census) = out.census_csv() {
                let path = write(&common.out, "census.csv", &census)?;
                let converged = out.converged_fraction().unwrap_or(1.0);
                println!("converged fraction {converged:.4}; census in {}", path.display());
            }
        }
        Command::Trace(common) => {
            let config = common.config(&RUN_DEFAULTS)?;
            let (_, csv) = cmd_trace(&config)?;
            println!("wrote {}", write(&common.out, "trace.csv", &csv)?.display());
        }
        Command::Ecdf(common) => {
            let config = common.config(&RUN_DEFAULTS)?;
            let (_, csv) = cmd_ecdf(&config)?;
            println!("wrote {}", write(&common.out, "ecdf.csv", &csv)?.display());
        }
        Command::Test {
            common,
            dump_resamples,
        } => {
            let config = common.config(&RUN_DEFAULTS)?;
            let out = cmd_test(&config)?;
            write(&common.out, "report.txt", &out.report_text())?;
            write(&common.out, "manifest.txt", &out.run_manifest())?;
            if let Some(path) = dump_resamples {
                std::fs::write(&path, out.resamples_csv())?;
            }
            print!("{}", out.report.to_key_value());
        }
        Command::Calibrate { common, runs } => {
            let config = common.config(&CALIBRATE_DEFAULTS)?;
            let cal = calibrate(&config, runs)?;
            let (chi2, chi2_p) = cal.uniformity_chi_square();
            let path = write(&common.out, "calibration.csv", &cal.to_csv())?;
            println!(
                "runs={runs} rejection_rate_0.05={:.4} chi_square={chi2:.4} chi_square_p={chi2_p:.4}",
                cal.rejection_rate(0.05)
            );
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_numerical() => 3,
                Error::Io(_) => 1,
                _ => 2,
            })
        }
    }
}
