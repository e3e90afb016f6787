//! End-to-end runs: draws, per-step trace statistics, ECDFs, permutation
//! tests and null calibration. Every function returns file contents as
//! strings; the `gwtest` binary only decides where they go.
//!
//! Each output starts with a `#` manifest line echoing the full
//! configuration, so rerunning with those values reproduces the file.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::{benchmark_graph, Graph};
use crate::gwishart::{
    clique_kernels, ClaimedOptions, ClaimedSampler, ConvergenceInfo, ExactSampler, FixedPointInit,
    GWishartParams,
};
use crate::matrix::{from_csv, to_csv, ConstrainedMatrix, SymMatrix};
use crate::mcmc::{random_permutation_kernel, random_update_kernel, Kernel};
use crate::ptest::{
    quantile, run_test, summary_element, summary_logdet, summary_logtrace, test_table, QuantileGap,
    SummaryTable, TestConfig, TestReport,
};
use crate::rng::RngStream;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Claimed,
    Exact,
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "claimed" => Ok(SamplerKind::Claimed),
            "exact" => Ok(SamplerKind::Exact),
            _ => Err(Error::Parse(format!("unknown sampler {s:?} (claimed, exact)"))),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SamplerKind::Claimed => "claimed",
            SamplerKind::Exact => "exact",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KernelKind {
    /// One uniformly chosen clique update per step.
    #[default]
    RandomUpdate,
    /// All clique updates per step, in a uniformly random order.
    RandomPermutation,
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ru" => Ok(KernelKind::RandomUpdate),
            "rp" => Ok(KernelKind::RandomPermutation),
            _ => Err(Error::Parse(format!("unknown kernel {s:?} (ru, rp)"))),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            KernelKind::RandomUpdate => "ru",
            KernelKind::RandomPermutation => "rp",
        })
    }
}

/// Scalar summary `h(Q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Summary {
    LogDet,
    LogTrace,
    /// 1-based entry `Q_ij`.
    Element(usize, usize),
}

impl Summary {
    pub fn evaluate(&self, q: &ConstrainedMatrix) -> Result<f64> {
        match *self {
            Summary::LogDet => summary_logdet(q),
            Summary::LogTrace => Ok(summary_logtrace(q)),
            Summary::Element(i, j) => summary_element(q, i, j),
        }
    }

    /// `element(2,4)`, `logtrace`, `logdet`: the three summaries of the trace plots.
    pub fn trace_defaults() -> Vec<Summary> {
        vec![Summary::Element(2, 4), Summary::LogTrace, Summary::LogDet]
    }
}

impl FromStr for Summary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown summary {s:?} (logdet, logtrace, element(i,j))"));
        match s {
            "logdet" => Ok(Summary::LogDet),
            "logtrace" => Ok(Summary::LogTrace),
            _ => {
                let inner = s
                    .strip_prefix("element(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let (i, j) = inner.split_once(',').ok_or_else(bad)?;
                let i = i.trim().parse().map_err(|_| bad())?;
                let j = j.trim().parse().map_err(|_| bad())?;
                Ok(Summary::Element(i, j))
            }
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summary::LogDet => f.write_str("logdet"),
            Summary::LogTrace => f.write_str("logtrace"),
            Summary::Element(i, j) => write!(f, "element({i},{j})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// `s = 10,000`, `q = 999,999`.
    Paper,
    /// `s = 5,000`, `q = 9,999`.
    Desk,
}

impl Preset {
    pub fn s(self) -> usize {
        match self {
            Preset::Paper => 10_000,
            Preset::Desk => 5_000,
        }
    }

    pub fn q(self) -> usize {
        match self {
            Preset::Paper => 999_999,
            Preset::Desk => 9_999,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::Parse(format!("unknown preset {s:?} (paper, desk)"))),
        }
    }
}

/// Resolves a benchmark name (`a`..`d`) or a path to a graph text file.
pub fn resolve_graph(spec: &str) -> Result<(String, Graph)> {
    if let Some(g) = benchmark_graph(spec) {
        return Ok((spec.to_string(), g));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::Io(format!("graph {spec:?} is neither a benchmark name nor a readable file: {e}")))?;
    Ok((spec.to_string(), Graph::parse_text(&text)?))
}

/// Reads a scale matrix `D` from a matrix CSV file.
pub fn read_scale_matrix(path: &Path) -> Result<SymMatrix> {
    from_csv(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub graph_label: String,
    pub graph: Arc<Graph>,
    pub sampler: SamplerKind,
    pub delta: f64,
    pub d: SymMatrix,
    /// `identity` or the file `d` was read from.
    pub d_label: String,
    pub s: usize,
    /// Chain length; `None` means three times the number of maximal cliques.
    pub r: Option<usize>,
    pub q: usize,
    pub seed: u64,
    pub kernel: KernelKind,
    /// Summaries for trace and ECDF output.
    pub summaries: Vec<Summary>,
    /// Summary used by the permutation test.
    pub test_summary: Summary,
    pub fp_init: FixedPointInit,
}

impl ExperimentConfig {
    /// `δ = 10`, `D = I`, `s = 10,000`, `r = 3m`, `q = 999,999`, seed 1, random-update kernel.
    pub fn new(graph_label: impl Into<String>, graph: Graph, sampler: SamplerKind) -> Self {
        let p = graph.p();
        ExperimentConfig {
            graph_label: graph_label.into(),
            graph: Arc::new(graph),
            sampler,
            delta: 10.0,
            d: SymMatrix::identity(p),
            d_label: "identity".to_string(),
            s: Preset::Paper.s(),
            r: None,
            q: Preset::Paper.q(),
            seed: 1,
            kernel: KernelKind::RandomUpdate,
            summaries: Summary::trace_defaults(),
            test_summary: Summary::LogDet,
            fp_init: FixedPointInit::WishartZeroed,
        }
    }

    pub fn benchmark(name: &str, sampler: SamplerKind) -> Result<Self> {
        let g = benchmark_graph(name)
            .ok_or_else(|| Error::InvalidParameter(format!("no benchmark graph {name:?}")))?;
        Ok(ExperimentConfig::new(name, g, sampler))
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.s = preset.s();
        self.q = preset.q();
        self
    }

    pub fn clique_count(&self) -> usize {
        self.graph.maximal_cliques().len()
    }

    pub fn r(&self) -> usize {
        self.r.unwrap_or(3 * self.clique_count())
    }

    pub fn params(&self) -> Result<GWishartParams> {
        GWishartParams::new(self.delta, self.d.clone(), self.graph.clone())
    }

    pub fn initial_sampler(&self) -> Result<InitialSampler> {
        let params = self.params()?;
        Ok(match self.sampler {
            SamplerKind::Exact => InitialSampler::Exact(ExactSampler::new(&params)?),
            SamplerKind::Claimed => InitialSampler::Claimed(ClaimedSampler::new(
                &params,
                ClaimedOptions {
                    init: self.fp_init,
                    ..ClaimedOptions::default()
                },
            )?),
        })
    }

    /// The composite clique-Gibbs kernel.
    pub fn kernel(&self) -> Result<Box<dyn Kernel<ConstrainedMatrix>>> {
        let parts: Vec<Box<dyn Kernel<ConstrainedMatrix>>> = clique_kernels(&self.params()?)?
            .into_iter()
            .map(|k| Box::new(k) as Box<dyn Kernel<ConstrainedMatrix>>)
            .collect();
        Ok(match self.kernel {
            KernelKind::RandomUpdate => Box::new(random_update_kernel(parts)?),
            KernelKind::RandomPermutation => Box::new(random_permutation_kernel(parts)?),
        })
    }

    /// One `#` line with everything needed to rerun.
    pub fn manifest(&self, command: &str) -> String {
        let fp_init = match self.fp_init {
            FixedPointInit::WishartZeroed => "wishart-zeroed",
            FixedPointInit::Identity => "identity",
        };
        let summaries: Vec<String> = self.summaries.iter().map(Summary::to_string).collect();
        format!(
            "# gwtest={VERSION} command={command} seed={} graph={} sampler={} delta={} d={} s={} r={} q={} \
             kernel={} fp_init={fp_init} summaries={} test_summary={}",
            self.seed,
            self.graph_label,
            self.sampler,
            self.delta,
            self.d_label,
            self.s,
            self.r(),
            self.q,
            self.kernel,
            summaries.join(";"),
            self.test_summary,
        )
    }
}

/// Source of the chains' starting states.
#[derive(Clone, Debug)]
pub enum InitialSampler {
    Claimed(ClaimedSampler),
    Exact(ExactSampler),
}

impl InitialSampler {
    pub fn sample(&self, rng: &mut RngStream) -> Result<(ConstrainedMatrix, Option<ConvergenceInfo>)> {
        match self {
            InitialSampler::Claimed(s) => s.sample(rng).map(|(q, info)| (q, Some(info))),
            InitialSampler::Exact(s) => s.sample(rng).map(|q| (q, None)),
        }
    }
}

/// Summaries of every chain at every step, stored chain-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryPaths {
    s: usize,
    r: usize,
    summaries: Vec<Summary>,
    values: Vec<f64>,
    convergence: Vec<Option<ConvergenceInfo>>,
}

impl SummaryPaths {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn summaries(&self) -> &[Summary] {
        &self.summaries
    }

    pub fn get(&self, chain: usize, step: usize, summary: usize) -> f64 {
        let k = self.summaries.len();
        self.values[(chain * (self.r + 1) + step) * k + summary]
    }

    /// Values of summary `summary` across all chains at step `step`.
    pub fn column(&self, step: usize, summary: usize) -> Vec<f64> {
        (0..self.s).map(|i| self.get(i, step, summary)).collect()
    }

    pub fn summary_index(&self, summary: Summary) -> Option<usize> {
        self.summaries.iter().position(|&h| h == summary)
    }

    /// Convergence info of each starting draw; `None` for the exact sampler.
    pub fn convergence(&self) -> &[Option<ConvergenceInfo>] {
        &self.convergence
    }

    /// The summary table `(h(x⁰), h(xʳ))` for one summary.
    pub fn table(&self, summary: usize) -> Result<SummaryTable> {
        SummaryTable::new(self.column(0, summary), self.column(self.r, summary))
    }
}

/// Runs `s` chains of `r` steps and records every summary at every step.
///
/// Chain `i` uses stream `i` for its starting draw and its kernel moves, the
/// same streams [`cmd_test`] uses, so step `r` here matches the test table.
pub fn simulate_paths(config: &ExperimentConfig) -> Result<SummaryPaths> {
    if config.s == 0 {
        return Err(Error::InvalidParameter("s must be >= 1".into()));
    }
    let sampler = config.initial_sampler()?;
    let kernel = config.kernel()?;
    let r = config.r();
    let summaries = config.summaries.clone();
    let per_chain: Vec<(Vec<f64>, Option<ConvergenceInfo>)> = (0..config.s)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<(Vec<f64>, Option<ConvergenceInfo>)> {
                let mut rng = RngStream::substream(config.seed, i as u64);
                let (mut q, info) = sampler.sample(&mut rng)?;
                let mut row = Vec::with_capacity((r + 1) * summaries.len());
                for step in 0..=r {
                    if step > 0 {
                        kernel.step(&mut q, &mut rng)?;
                    }
                    for h in &summaries {
                        row.push(h.evaluate(&q)?);
                    }
                }
                Ok((row, info))
            };
            run().map_err(|e| Error::Chain {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(config.s * (r + 1) * summaries.len());
    let mut convergence = Vec::with_capacity(config.s);
    for (row, info) in per_chain {
        values.extend(row);
        convergence.push(info);
    }
    Ok(SummaryPaths {
        s: config.s,
        r,
        summaries,
        values,
        convergence,
    })
}

/// Sample mean and standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub summary: Summary,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and standard deviation across chains, per step and summary.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStats {
    pub s: usize,
    pub rows: Vec<TraceRow>,
}

impl TraceStats {
    pub fn from_paths(paths: &SummaryPaths) -> Self {
        let mut rows = Vec::with_capacity((paths.r + 1) * paths.summaries.len());
        for step in 0..=paths.r {
            for (k, &summary) in paths.summaries.iter().enumerate() {
                let (mean, sd) = mean_sd(&paths.column(step, k));
                rows.push(TraceRow {
                    step,
                    summary,
                    mean,
                    sd,
                });
            }
        }
        TraceStats { s: paths.s, rows }
    }

    pub fn row(&self, step: usize, summary: Summary) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.step == step && r.summary == summary)
    }

    /// `step,summary,mean,sd` CSV body.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,summary,mean,sd\n");
        for r in &self.rows {
            writeln!(s, "{},{},{:.16e},{:.16e}", r.step, r.summary, r.mean, r.sd).unwrap();
        }
        s
    }
}

/// Drop in the standard deviation of a summary from `step_a` to `step_b`,
/// `sd_a - sd_b`, with its bootstrap standard error over chains.
pub fn sd_drop(
    paths: &SummaryPaths,
    summary: usize,
    step_a: usize,
    step_b: usize,
    replicates: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two bootstrap replicates".into()));
    }
    let a = paths.column(step_a, summary);
    let b = paths.column(step_b, summary);
    let drop = mean_sd(&a).1 - mean_sd(&b).1;
    let s = a.len();
    let mut boot = Vec::with_capacity(replicates);
    let (mut ra, mut rb) = (vec![0.0; s], vec![0.0; s]);
    for _ in 0..replicates {
        for k in 0..s {
            let i = rng.uniform_int(s)? - 1;
            ra[k] = a[i];
            rb[k] = b[i];
        }
        boot.push(mean_sd(&ra).1 - mean_sd(&rb).1);
    }
    Ok((drop, mean_sd(&boot).1))
}

/// Average least-squares slope of a summary against the step index, with the
/// standard error of that average over chains.
pub fn mean_slope(paths: &SummaryPaths, summary: usize) -> Result<(f64, f64)> {
    let r = paths.r;
    if r == 0 {
        return Err(Error::InvalidParameter("slope needs r >= 1".into()));
    }
    let steps = (r + 1) as f64;
    let x_bar = r as f64 / 2.0;
    let sxx: f64 = (0..=r).map(|l| (l as f64 - x_bar).powi(2)).sum();
    let slopes: Vec<f64> = (0..paths.s)
        .map(|i| {
            let y_bar = (0..=r).map(|l| paths.get(i, l, summary)).sum::<f64>() / steps;
            (0..=r)
                .map(|l| (l as f64 - x_bar) * (paths.get(i, l, summary) - y_bar))
                .sum::<f64>()
                / sxx
        })
        .collect();
    let (mean, sd) = mean_sd(&slopes);
    Ok((mean, sd / (paths.s as f64).sqrt()))
}

/// `q_hi - q_lo` using the library's lower empirical quantile.
pub fn interquantile_range(values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    Ok(quantile(values, hi)? - quantile(values, lo)?)
}

/// Output of [`cmd_sample`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutput {
    pub draws: Vec<ConstrainedMatrix>,
    pub convergence: Vec<ConvergenceInfo>,
    manifest: String,
}

impl SampleOutput {
    /// Manifest line, then each draw as a `# draw k` line followed by its rows.
    pub fn draws_csv(&self) -> String {
        let mut s = format!("{}\n", self.manifest);
        for (k, q) in self.draws.iter().enumerate() {
            writeln!(s, "# draw {}", k + 1).unwrap();
            s.push_str(&to_csv(q.matrix()));
        }
        s
    }

    /// `sweeps,count` histogram of the fixed-point iterations.
    pub fn census_csv(&self) -> Option<String> {
        if self.convergence.is_empty() {
            return None;
        }
        let mut hist = BTreeMap::new();
        for info in &self.convergence {
            *hist.entry(info.sweeps).or_insert(0usize) += 1;
        }
        let converged = self.convergence.iter().filter(|c| c.converged).count();
        let mut s = format!("{}\n", self.manifest);
        writeln!(
            s,
            "# draws={} converged={} not_converged={}",
            self.convergence.len(),
            converged,
            self.convergence.len() - converged
        )
        .unwrap();
        s.push_str("sweeps,count\n");
        for (sweeps, count) in hist {
            writeln!(s, "{sweeps},{count}").unwrap();
        }
        Some(s)
    }

    pub fn converged_fraction(&self) -> Option<f64> {
        if self.convergence.is_empty() {
            return None;
        }
        let c = self.convergence.iter().filter(|c| c.converged).count();
        Some(c as f64 / self.convergence.len() as f64)
    }
}

/// Splits a draws file written by [`SampleOutput::draws_csv`] into matrices.
pub fn parse_draws(text: &str) -> Result<Vec<SymMatrix>> {
    let mut blocks: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.starts_with("# draw ") {
            blocks.push(String::new());
        } else if let Some(b) = blocks.last_mut() {
            b.push_str(line);
            b.push('\n');
        }
    }
    blocks.iter().map(|b| from_csv(b)).collect()
}

/// `n` independent draws; draw `k` uses stream `k` of the seed.
pub fn cmd_sample(config: &ExperimentConfig, n: usize) -> Result<SampleOutput> {
    let sampler = config.initial_sampler()?;
    let results: Vec<(ConstrainedMatrix, Option<ConvergenceInfo>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            sampler
                .sample(&mut RngStream::substream(config.seed, k as u64))
                .map_err(|e| Error::Chain {
                    index: k,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let (draws, info): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(SampleOutput {
        draws,
        convergence: info.into_iter().flatten().collect(),
        manifest: format!("{} n={n}", config.manifest("sample")),
    })
}

/// Trace statistics CSV: manifest line, then `step,summary,mean,sd`.
pub fn cmd_trace(config: &ExperimentConfig) -> Result<(TraceStats, String)> {
    let stats = TraceStats::from_paths(&simulate_paths(config)?);
    let csv = format!("{}\n{}", config.manifest("trace"), stats.to_csv());
    Ok((stats, csv))
}

/// ECDF CSV of every summary at steps `0` and `r`:
/// `summary,step,rank,value,ecdf` with values sorted within each block.
pub fn cmd_ecdf(config: &ExperimentConfig) -> Result<(SummaryPaths, String)> {
    let paths = simulate_paths(config)?;
    let mut s = format!("{}\nsummary,step,rank,value,ecdf\n", config.manifest("ecdf"));
    let n = paths.s as f64;
    for (k, summary) in paths.summaries.iter().enumerate() {
        let mut steps = vec![0, paths.r];
        steps.dedup();
        for step in steps {
            let mut col = paths.column(step, k);
            col.sort_by(f64::total_cmp);
            for (i, v) in col.iter().enumerate() {
                writeln!(s, "{summary},{step},{},{v:.16e},{:.16e}", i + 1, (i + 1) as f64 / n).unwrap();
            }
        }
    }
    Ok((paths, s))
}

/// Output of [`cmd_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct TestOutput {
    pub report: TestReport,
    pub wall_seconds: f64,
    manifest: String,
}

impl TestOutput {
    /// Manifest line, then the `key=value` report.
    pub fn report_text(&self) -> String {
        format!("{}\n{}", self.manifest, self.report.to_key_value())
    }

    /// Run metadata that varies between reruns: version and wall time.
    pub fn run_manifest(&self) -> String {
        format!(
            "{}\nversion={VERSION}\nwall_seconds={:.3}\n",
            self.manifest, self.wall_seconds
        )
    }

    pub fn resamples_csv(&self) -> String {
        format!("{}\n{}", self.manifest, self.report.resamples_csv())
    }
}

/// The permutation test with the configured sampler, kernel and summary and
/// the 0.1-quantile gap statistic.
pub fn cmd_test(config: &ExperimentConfig) -> Result<TestOutput> {
    let start = Instant::now();
    let sampler = config.initial_sampler()?;
    let kernel = config.kernel()?;
    let h = config.test_summary;
    let test_config = TestConfig {
        s: config.s,
        r: config.r(),
        q: config.q,
        master_seed: config.seed,
    };
    let mut report = run_test(
        |rng: &mut RngStream| sampler.sample(rng).map(|(q, _)| q),
        kernel.as_ref(),
        |q: &ConstrainedMatrix| h.evaluate(q),
        &h.to_string(),
        &QuantileGap::default(),
        &test_config,
    )?;
    report.labels.insert("graph".into(), config.graph_label.clone());
    report.labels.insert("sampler".into(), config.sampler.to_string());
    report.labels.insert("delta".into(), config.delta.to_string());
    Ok(TestOutput {
        report,
        wall_seconds: start.elapsed().as_secs_f64(),
        manifest: config.manifest("test"),
    })
}

/// Outcome of [`calibrate`]: p-values of repeated tests with independent seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub seeds: Vec<u64>,
    pub p_values: Vec<f64>,
    pub q: usize,
    manifest: String,
}

impl Calibration {
    pub const BINS: usize = 10;

    /// Fraction of p-values at or below `alpha`.
    pub fn rejection_rate(&self, alpha: f64) -> f64 {
        self.p_values.iter().filter(|&&p| p <= alpha).count() as f64 / self.p_values.len() as f64
    }

    /// Counts over the ten bins `((b-1)/10, b/10]`, assigned through the
    /// grid index `k = p (q+1)` so that grid points split evenly when `q+1`
    /// is a multiple of ten.
    pub fn bin_counts(&self) -> [usize; Self::BINS] {
        let mut counts = [0; Self::BINS];
        let grid = (self.q + 1) as f64;
        for &p in &self.p_values {
            let k = (p * grid).round() as usize;
            let b = (k.saturating_sub(1) * Self::BINS) / (self.q + 1);
            counts[b.min(Self::BINS - 1)] += 1;
        }
        counts
    }

    /// Pearson chi-square statistic of the bin counts against uniformity and
    /// its upper-tail probability on `BINS - 1` degrees of freedom.
    pub fn uniformity_chi_square(&self) -> (f64, f64) {
        let expected = self.p_values.len() as f64 / Self::BINS as f64;
        let stat = self
            .bin_counts()
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum::<f64>();
        let dist = ChiSquared::new((Self::BINS - 1) as f64).expect("positive degrees of freedom");
        (stat, 1.0 - dist.cdf(stat))
    }

    /// Manifest line, summary comment lines, then `run,seed,p_value`.
    pub fn to_csv(&self) -> String {
        let (chi2, chi2_p) = self.uniformity_chi_square();
        let mut s = format!("{}\n", self.manifest);
        writeln!(s, "# runs={} rejection_rate_0.05={}", self.p_values.len(), self.rejection_rate(0.05)).unwrap();
        let counts: Vec<String> = self.bin_counts().iter().map(|c| c.to_string()).collect();
        writeln!(s, "# bins={} chi_square={chi2:.6} chi_square_p={chi2_p:.6}", counts.join(";")).unwrap();
        s.push_str("run,seed,p_value\n");
        for (k, (seed, p)) in self.seeds.iter().zip(&self.p_values).enumerate() {
            writeln!(s, "{},{seed},{p:.17e}", k + 1).unwrap();
        }
        s
    }
}

/// Runs `runs` independent tests with seeds `seed, seed+1, ...`.
///
/// Under a correct sampler the p-values are exchangeable draws that are
/// uniform on `{1/(q+1), ..., 1}`.
pub fn calibrate(config: &ExperimentConfig, runs: usize) -> Result<Calibration> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let sampler = config.initial_sampler()?;
    let kernel = config.kernel()?;
    let h = config.test_summary;
    let seeds: Vec<u64> = (0..runs as u64).map(|k| config.seed.wrapping_add(k)).collect();
    let p_values = seeds
        .iter()
        .map(|&seed| {
            let table = crate::ptest::summary_table(
                |rng: &mut RngStream| sampler.sample(rng).map(|(q, _)| q),
                kernel.as_ref(),
                |q: &ConstrainedMatrix| h.evaluate(q),
                config.s,
                config.r(),
                seed,
            )?;
            let test_config = TestConfig {
                s: config.s,
                r: config.r(),
                q: config.q,
                master_seed: seed,
            };
            Ok(test_table(&table, &QuantileGap::default(), &test_config)?.p_value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Calibration {
        seeds,
        p_values,
        q: config.q,
        manifest: format!("{} runs={runs}", config.manifest("calibrate")),
    })
}
