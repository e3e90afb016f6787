//! Exchangeability permutation test.
//!
//! `s` independent chains are started from the sampler under test and run
//! for `r` steps of a reversible kernel. A scalar summary of the initial and
//! final states fills the two columns of a [`SummaryTable`]; the observed
//! statistic is compared against `q` versions in which each row has been
//! swapped with probability one half.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{cholesky, ConstrainedMatrix, SymMatrix};
use crate::mcmc::{run_chain, Kernel, Record};
use crate::rng::{RngStream, RESAMPLE_STREAM_BASE};

/// Resamples drawn from one random stream; blocks are the unit of parallel work.
pub const RESAMPLE_BLOCK: usize = 1024;

impl AsRef<SymMatrix> for SymMatrix {
    fn as_ref(&self) -> &SymMatrix {
        self
    }
}

impl AsRef<SymMatrix> for ConstrainedMatrix {
    fn as_ref(&self) -> &SymMatrix {
        self.matrix()
    }
}

/// `ln |Q|`.
pub fn summary_logdet<M: AsRef<SymMatrix>>(q: &M) -> Result<f64> {
    Ok(cholesky(q.as_ref())?.logdet())
}

/// `ln tr(Q)`.
pub fn summary_logtrace<M: AsRef<SymMatrix>>(q: &M) -> f64 {
    q.as_ref().trace().ln()
}

/// Entry `Q_ij`, 1-based.
pub fn summary_element<M: AsRef<SymMatrix>>(q: &M, i: usize, j: usize) -> Result<f64> {
    let m = q.as_ref();
    let p = m.dim();
    for v in [i, j] {
        if !(1..=p).contains(&v) {
            return Err(Error::NodeOutOfRange { node: v, p });
        }
    }
    Ok(m.get(i - 1, j - 1))
}

/// 1-based rank `⌈p·s⌉` of the lower empirical `p`-quantile, clamped to `1..=s`.
/// A relative slack of 1e-12 absorbs rounding in `p·s` (so `0.1 · 30` gives 3).
pub fn quantile_rank(p: f64, s: usize) -> usize {
    let x = p * s as f64;
    let rank = (x - 1e-12 * x.abs().max(1.0)).ceil();
    (rank.max(1.0) as usize).min(s)
}

/// Lower empirical quantile: the `⌈p·s⌉`-th smallest value, no interpolation.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {p} not in (0,1)")));
    }
    let mut v = values.to_vec();
    Ok(kth_smallest(&mut v, quantile_rank(p, values.len())))
}

fn kth_smallest(v: &mut [f64], rank: usize) -> f64 {
    *v.select_nth_unstable_by(rank - 1, f64::total_cmp).1
}

/// The `s × 2` table of summaries: `first[i] = h(x_i⁰)`, `second[i] = h(x_iʳ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl SummaryTable {
    pub fn new(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                got: second.len(),
            });
        }
        if first.is_empty() {
            return Err(Error::EmptyInput);
        }
        if first.iter().chain(&second).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("summary table holds a non-finite value".into()));
        }
        Ok(SummaryTable { first, second })
    }

    pub fn from_rows(rows: &[(f64, f64)]) -> Result<Self> {
        SummaryTable::new(rows.iter().map(|r| r.0).collect(), rows.iter().map(|r| r.1).collect())
    }

    pub fn s(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    /// Columns after swapping row `i` wherever bit `i` of `keep` is 0.
    pub fn swapped(&self, keep: &[u64]) -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::with_capacity(self.s());
        let mut b = Vec::with_capacity(self.s());
        for i in 0..self.s() {
            if bit(keep, i) {
                a.push(self.first[i]);
                b.push(self.second[i]);
            } else {
                a.push(self.second[i]);
                b.push(self.first[i]);
            }
        }
        (a, b)
    }
}

#[inline]
fn bit(words: &[u64], i: usize) -> bool {
    (words[i / 64] >> (i % 64)) & 1 == 1
}

/// A statistic evaluated on the table swapped by a row-keep bitmask.
pub type PreparedStatistic<'a> = Box<dyn Fn(&[u64]) -> f64 + Send + Sync + 'a>;

/// Scalar function `H(T)` of a summary table; large values indicate that the
/// two columns differ in distribution.
pub trait Statistic: Send + Sync {
    fn name(&self) -> String;

    fn evaluate(&self, first: &[f64], second: &[f64]) -> f64;

    fn evaluate_table(&self, table: &SummaryTable) -> f64 {
        self.evaluate(table.first(), table.second())
    }

    /// Returns a function of the row-keep bitmask evaluating the statistic on
    /// the correspondingly swapped table. Implementations may precompute
    /// per-table state but must agree exactly with [`Statistic::evaluate`].
    fn prepare<'a>(&'a self, table: &'a SummaryTable) -> PreparedStatistic<'a> {
        Box::new(move |keep| {
            let (a, b) = table.swapped(keep);
            self.evaluate(&a, &b)
        })
    }
}

/// `|Quantile(first, level) - Quantile(second, level)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantileGap {
    pub level: f64,
}

impl Default for QuantileGap {
    fn default() -> Self {
        QuantileGap { level: 0.1 }
    }
}

impl Statistic for QuantileGap {
    fn name(&self) -> String {
        format!("quantile_gap({})", self.level)
    }

    fn evaluate(&self, first: &[f64], second: &[f64]) -> f64 {
        let a = quantile(first, self.level).expect("nonempty column");
        let b = quantile(second, self.level).expect("nonempty column");
        (a - b).abs()
    }

    // Let `lo` and `hi` be the `rank`-th smallest row minimum and row maximum.
    // Whatever the swaps, a column has fewer than `rank` values below `lo` and
    // at least `rank` values at or below `hi`, so its quantile lies in
    // `[lo, hi]`. Rows entirely below `lo` add one value to each column; the
    // remaining values up to `hi` are sorted once, and each resample walks
    // them in order, routing every value to its column until both columns
    // reach `rank`.
    fn prepare<'a>(&'a self, table: &'a SummaryTable) -> PreparedStatistic<'a> {
        let s = table.s();
        let rank = quantile_rank(self.level, s);
        let mut mins: Vec<f64> = (0..s).map(|i| table.first[i].min(table.second[i])).collect();
        let mut maxes: Vec<f64> = (0..s).map(|i| table.first[i].max(table.second[i])).collect();
        let lo = kth_smallest(&mut mins, rank);
        let hi = kth_smallest(&mut maxes, rank);

        let mut base = 0usize;
        let mut values: Vec<SortedValue> = Vec::new();
        for i in 0..s {
            let (x, y) = (table.first[i], table.second[i]);
            if x.max(y) < lo {
                base += 1;
                continue;
            }
            for (value, from_first) in [(x, true), (y, false)] {
                if value <= hi {
                    values.push(SortedValue {
                        value,
                        word: i / 64,
                        shift: (i % 64) as u32,
                        from_first,
                    });
                }
            }
        }
        values.sort_by(|a, b| a.value.total_cmp(&b.value));

        Box::new(move |keep| {
            let (mut count_a, mut count_b) = (base, base);
            let (mut qa, mut qb) = (None, None);
            for v in &values {
                let kept = (keep[v.word] >> v.shift) & 1 == 1;
                if kept == v.from_first {
                    count_a += 1;
                    if count_a == rank {
                        qa = Some(v.value);
                        if qb.is_some() {
                            break;
                        }
                    }
                } else {
                    count_b += 1;
                    if count_b == rank {
                        qb = Some(v.value);
                        if qa.is_some() {
                            break;
                        }
                    }
                }
            }
            (qa.expect("quantile within band") - qb.expect("quantile within band")).abs()
        })
    }
}

struct SortedValue {
    value: f64,
    word: usize,
    shift: u32,
    /// Whether the value sits in the first column when its row is kept.
    from_first: bool,
}

/// `q` resampled statistics. Resample `k` uses stream
/// `RESAMPLE_STREAM_BASE + k / RESAMPLE_BLOCK` of `master_seed`, drawing
/// `⌈s/64⌉` words of fair bits; bit `i` set keeps row `i`, clear swaps it.
pub fn resample_statistics(
    table: &SummaryTable,
    statistic: &dyn Statistic,
    q: usize,
    master_seed: u64,
) -> Vec<f64> {
    let eval = statistic.prepare(table);
    let words = table.s().div_ceil(64);
    let blocks = q.div_ceil(RESAMPLE_BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = RngStream::substream(master_seed, RESAMPLE_STREAM_BASE + b as u64);
            let count = RESAMPLE_BLOCK.min(q - b * RESAMPLE_BLOCK);
            let mut keep = vec![0u64; words];
            let eval = &eval;
            (0..count)
                .map(move |_| {
                    rng.fill_bits(&mut keep);
                    eval(&keep)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `(1 + #{k : ω_k ≥ ω*}) / (q + 1)`.
pub fn p_value(omega_star: f64, resampled: &[f64]) -> Result<f64> {
    if resampled.is_empty() {
        return Err(Error::InvalidParameter("need at least one resample".into()));
    }
    let exceed = resampled.iter().filter(|&&w| w >= omega_star).count();
    Ok((1 + exceed) as f64 / (resampled.len() + 1) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestConfig {
    pub s: usize,
    pub r: usize,
    pub q: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestReport {
    pub omega_star: f64,
    pub omega_resampled: Vec<f64>,
    pub p_value: f64,
    pub config: TestConfig,
    /// Free-form labels: summary and statistic names, graph, sampler, ...
    pub labels: BTreeMap<String, String>,
}

impl TestReport {
    /// Flat `key=value` block, one pair per line.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        writeln!(s, "seed={}", c.master_seed).unwrap();
        writeln!(s, "s={}", c.s).unwrap();
        writeln!(s, "r={}", c.r).unwrap();
        writeln!(s, "q={}", c.q).unwrap();
        for (k, v) in &self.labels {
            writeln!(s, "{k}={v}").unwrap();
        }
        writeln!(s, "omega_star={:.17e}", self.omega_star).unwrap();
        let exceed = self.omega_resampled.iter().filter(|&&w| w >= self.omega_star).count();
        writeln!(s, "exceedances={exceed}").unwrap();
        writeln!(s, "p_value={:.17e}", self.p_value).unwrap();
        s
    }

    /// `k,omega` CSV of the resampled statistics.
    pub fn resamples_csv(&self) -> String {
        let mut s = String::from("k,omega\n");
        for (k, w) in self.omega_resampled.iter().enumerate() {
            writeln!(s, "{},{:.17e}", k + 1, w).unwrap();
        }
        s
    }
}

/// Runs `s` chains in parallel. Chain `i` draws its start from `sampler` and
/// its kernel moves from stream `i` of `master_seed`, so the table does not
/// depend on the number of worker threads.
pub fn summary_table<S, F, K, H>(
    sampler: F,
    kernel: &K,
    summary: H,
    s: usize,
    r: usize,
    master_seed: u64,
) -> Result<SummaryTable>
where
    S: Clone + Send,
    F: Fn(&mut RngStream) -> Result<S> + Sync,
    K: Kernel<S> + ?Sized,
    H: Fn(&S) -> Result<f64> + Sync,
{
    if s == 0 {
        return Err(Error::EmptyInput);
    }
    let rows: Vec<(f64, f64)> = (0..s)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<(f64, f64)> {
                let mut rng = RngStream::substream(master_seed, i as u64);
                let x0 = sampler(&mut rng)?;
                let trace = run_chain(x0, kernel, r, &mut rng, Record::Endpoints, i)?;
                Ok((summary(trace.initial())?, summary(trace.last())?))
            };
            run().map_err(|e| Error::Chain {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    SummaryTable::from_rows(&rows)
}

/// Observed statistic, resamples and p-value for a finished table.
pub fn test_table(
    table: &SummaryTable,
    statistic: &dyn Statistic,
    config: &TestConfig,
) -> Result<TestReport> {
    if config.q == 0 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    let omega_star = statistic.evaluate_table(table);
    let omega_resampled = resample_statistics(table, statistic, config.q, config.master_seed);
    let p_value = p_value(omega_star, &omega_resampled)?;
    let mut labels = BTreeMap::new();
    labels.insert("statistic".to_string(), statistic.name());
    Ok(TestReport {
        omega_star,
        omega_resampled,
        p_value,
        config: config.clone(),
        labels,
    })
}

/// The full test: sample, run chains, tabulate, resample, p-value.
pub fn run_test<S, F, K, H>(
    sampler: F,
    kernel: &K,
    summary: H,
    summary_name: &str,
    statistic: &dyn Statistic,
    config: &TestConfig,
) -> Result<TestReport>
where
    S: Clone + Send,
    F: Fn(&mut RngStream) -> Result<S> + Sync,
    K: Kernel<S> + ?Sized,
    H: Fn(&S) -> Result<f64> + Sync,
{
    let table = summary_table(sampler, kernel, summary, config.s, config.r, config.master_seed)?;
    let mut report = test_table(&table, statistic, config)?;
    report.labels.insert("summary".to_string(), summary_name.to_string());
    report.labels.insert("kernel".to_string(), kernel.name());
    Ok(report)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut worst) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(worst)
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_critical_value(alpha: f64, na: usize, nb: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}
