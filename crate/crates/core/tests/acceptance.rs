//! Acceptance suite: one test per criterion, each printing a single
//! `ACCEPTANCE <n> PASS|FAIL <description> | <measurements>` line.
//!
//! Lines are written straight to stdout so they appear even when the test
//! harness captures output. Seeds are fixed up front.

mod common;

use std::io::Write;
use std::sync::Arc;

use common::{mat_mul, mh_kernel, TableProposal};
use gwtest::experiment::{calibrate, cmd_test, sd_drop, simulate_paths, ExperimentConfig, SamplerKind, Summary};
use gwtest::graph::{benchmark_graph, Graph};
use gwtest::gwishart::{ExactSampler, GWishartParams};
use gwtest::matrix::{schur_complement, SymMatrix};
use gwtest::mcmc::{detailed_balance_residual, random_permutation_kernel, random_update_kernel, transition_matrix};
use gwtest::ptest::{ks_critical_value, ks_statistic};
use gwtest::RngStream;
use nalgebra::DMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn report(id: u32, description: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("ACCEPTANCE {id:>2} {verdict} {description} | {detail}\n");
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|p| format!("{p:.3e}")).collect::<Vec<_>>().join(",")
}

/// p-values of `cmd_test` for the given seeds.
fn p_values(config: &ExperimentConfig, seeds: &[u64]) -> Vec<f64> {
    seeds
        .iter()
        .map(|&seed| {
            let mut c = config.clone();
            c.seed = seed;
            cmd_test(&c).unwrap().report.p_value
        })
        .collect()
}

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[test]
fn criterion_01_detailed_balance() {
    let weights = vec![1.0, 2.5, 4.0];
    let total: f64 = weights.iter().sum();
    let pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let p1 = vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.2, 0.3], vec![0.25, 0.25, 0.5]];
    let p2 = vec![vec![0.3, 0.3, 0.4], vec![0.7, 0.1, 0.2], vec![0.2, 0.6, 0.2]];
    let make = || {
        vec![
            mh_kernel("k1", weights.clone(), TableProposal::new(p1.clone())),
            mh_kernel("k2", weights.clone(), TableProposal::new(p2.clone())),
        ]
    };
    let states = [0usize, 1, 2];
    let [k1, k2]: [_; 2] = make().try_into().ok().unwrap();
    let m1 = transition_matrix(k1.as_ref(), &states).unwrap();
    let m2 = transition_matrix(k2.as_ref(), &states).unwrap();
    let ru = transition_matrix(&random_update_kernel(make()).unwrap(), &states).unwrap();
    let rp = transition_matrix(&random_permutation_kernel(make()).unwrap(), &states).unwrap();
    let residuals = [
        detailed_balance_residual(&pi, &m1),
        detailed_balance_residual(&pi, &m2),
        detailed_balance_residual(&pi, &ru),
        detailed_balance_residual(&pi, &rp),
    ];
    // the fixed-order sweep is only a contrast, it carries no contract
    let sweep = detailed_balance_residual(&pi, &mat_mul(&m1, &m2));
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    report(
        1,
        "detailed balance of MH, random-update and random-permutation kernels on a 3-state target",
        worst <= 1e-12,
        format!("max residual {worst:.2e} (tol 1e-12); fixed sweep residual {sweep:.2e}"),
    );
}

#[test]
fn criterion_02_wishart_parameterization() {
    let g = Arc::new(Graph::edgeless(1).unwrap());
    let params = GWishartParams::new(10.0, SymMatrix::diagonal(&[2.0]), g).unwrap();
    let sampler = ExactSampler::new(&params).unwrap();
    let mut rng = RngStream::substream(2, 0);
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng).unwrap().entry(1, 1).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    report(
        2,
        "p=1, delta=10, D=[2]: 1e6 draws are gamma(5, rate 1)",
        (mean - 5.0).abs() <= 0.05 && (var - 5.0).abs() <= 0.15,
        format!("mean {mean:.4} (5 +- 0.05), variance {var:.4} (5 +- 0.15)"),
    );
}

#[test]
fn criterion_03_exact_clique_marginal() {
    let params = GWishartParams::with_identity(10.0, Arc::new(benchmark_graph("a").unwrap())).unwrap();
    let sampler = ExactSampler::new(&params).unwrap();
    let mut rng = RngStream::substream(3, 0);
    let n = 100_000;
    let mut sum = DMatrix::zeros(3, 3);
    for _ in 0..n {
        let q = sampler.sample(&mut rng).unwrap();
        sum += schur_complement(q.matrix(), &[1, 2, 3]).unwrap().as_matrix();
    }
    let mean = sum / n as f64;
    // W(10, I_3) in this parameterization has n = 12 degrees of freedom
    let expected = DMatrix::<f64>::identity(3, 3) * 12.0;
    let worst = (&mean - &expected).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    report(
        3,
        "graph (a), C={1,2,3}: mean Schur complement over 1e5 exact draws is 12 I",
        worst <= 0.02 * 12.0,
        format!("max |mean - 12 I| = {worst:.4} (tol 0.24); diagonal {:.3},{:.3},{:.3}", mean[(0, 0)], mean[(1, 1)], mean[(2, 2)]),
    );
}

#[test]
fn criterion_04_stationarity_under_null() {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, seed) in [("a", 41u64), ("c", 42)] {
        let mut c = ExperimentConfig::benchmark(name, SamplerKind::Exact).unwrap();
        c.s = 10_000;
        c.seed = seed;
        c.summaries = vec![Summary::LogDet];
        let paths = simulate_paths(&c).unwrap();
        let ks = ks_statistic(&paths.column(0, 0), &paths.column(c.r(), 0)).unwrap();
        let crit = ks_critical_value(0.001, c.s, c.s);
        pass &= ks < crit;
        details.push(format!("graph {name} r={} KS {ks:.4} < {crit:.4}", c.r()));
    }
    report(
        4,
        "exact sampler + P_ru, s=1e4: ln|Q| at l=0 and l=r pass a two-sample KS test at 0.999",
        pass,
        details.join("; "),
    );
}

#[test]
fn criterion_05_strong_rejections() {
    let mut all = Vec::new();
    let mut details = Vec::new();
    for name in ["c", "d"] {
        let mut c = ExperimentConfig::benchmark(name, SamplerKind::Claimed).unwrap();
        c.s = 5_000;
        c.q = 9_999;
        let ps = p_values(&c, &SEEDS);
        details.push(format!("graph {name} r={}: {}", c.r(), fmt_list(&ps)));
        all.extend(ps);
    }
    report(
        5,
        "claimed sampler, graphs (c),(d), s=5000, q=9999, 5 seeds each: all p <= 0.001",
        all.iter().all(|&p| p <= 0.001),
        details.join("; "),
    );
}

#[test]
fn criterion_06_moderate_rejection() {
    let mut c = ExperimentConfig::benchmark("b", SamplerKind::Claimed).unwrap();
    c.s = 10_000;
    c.r = Some(6);
    c.q = 99_999;
    let ps = p_values(&c, &SEEDS);
    let med = median(&ps);
    let small = ps.iter().filter(|&&p| p <= 0.05).count();
    report(
        6,
        "claimed sampler, graph (b), s=1e4, r=6, q=99999, 5 seeds: median p <= 0.08, >= 3 of 5 p <= 0.05",
        med <= 0.08 && small >= 3,
        format!("p = {}; median {med:.3e}; {small} of 5 <= 0.05", fmt_list(&ps)),
    );
}

#[test]
fn criterion_07_null_behaviour() {
    let mut all = Vec::new();
    let mut details = Vec::new();
    for name in ["a", "c"] {
        let mut c = ExperimentConfig::benchmark(name, SamplerKind::Exact).unwrap();
        c.s = 10_000;
        c.q = 9_999;
        let ps = p_values(&c, &SEEDS);
        details.push(format!("graph {name}: {}", fmt_list(&ps)));
        all.extend(ps);
    }
    let small = all.iter().filter(|&&p| p <= 0.05).count();
    report(
        7,
        "exact sampler, graphs (a),(c), s=1e4, 5 seeds each: at most 1 of 10 p <= 0.05",
        small <= 1,
        format!("{}; {small} of 10 <= 0.05", details.join("; ")),
    );
}

#[test]
fn criterion_08_long_run_detection() {
    let mut c = ExperimentConfig::benchmark("a", SamplerKind::Claimed).unwrap();
    c.s = 100_000;
    c.q = 99_999;
    let ps = p_values(&c, &SEEDS);
    let med = median(&ps);
    report(
        8,
        "[extended] claimed sampler, graph (a), s=1e5, q=99999, 5 seeds: median p <= 0.07",
        med <= 0.07,
        format!("p = {}; median {med:.3e}", fmt_list(&ps)),
    );
}

#[test]
fn criterion_09_validity_calibration() {
    let mut c = ExperimentConfig::benchmark("a", SamplerKind::Exact).unwrap();
    c.s = 500;
    c.q = 999;
    c.seed = 9_000;
    let cal = calibrate(&c, 200).unwrap();
    let rate = cal.rejection_rate(0.05);
    let (chi2, chi2_p) = cal.uniformity_chi_square();
    let critical = ChiSquared::new(9.0).unwrap().inverse_cdf(0.999);
    report(
        9,
        "200 null runs (exact, graph (a), s=500, q=999): P(p <= 0.05) <= 0.096, 10-bin chi-square not rejected at 0.001",
        rate <= 0.096 && chi2 < critical,
        format!("rate {rate:.3}; chi-square {chi2:.2} < {critical:.2} (p {chi2_p:.3}); bins {:?}", cal.bin_counts()),
    );
}

#[test]
fn criterion_10_trace_statistics() {
    let mut details = Vec::new();
    let mut pass = true;
    let cases = [
        ("b", SamplerKind::Claimed, true),
        ("c", SamplerKind::Claimed, true),
        ("d", SamplerKind::Claimed, true),
        ("a", SamplerKind::Exact, false),
        ("c", SamplerKind::Exact, false),
    ];
    for (k, (name, sampler, expect_drop)) in cases.into_iter().enumerate() {
        let mut c = ExperimentConfig::benchmark(name, sampler).unwrap();
        // the graph (b) effect is near 3.7 se at s=1e4, so a larger s keeps the
        // verdict from hinging on the seed
        c.s = 40_000;
        c.seed = 100 + k as u64;
        c.summaries = vec![Summary::LogDet];
        c.r = Some(1);
        let paths = simulate_paths(&c).unwrap();
        let mut rng = RngStream::substream(c.seed, u64::MAX);
        let (drop, se) = sd_drop(&paths, 0, 0, 1, 500, &mut rng).unwrap();
        let z = drop / se;
        let ok = if expect_drop { z >= 3.0 } else { z < 3.0 };
        pass &= ok;
        details.push(format!("{name}/{sampler} drop {drop:.4} = {z:.1} se"));
    }
    report(
        10,
        "s=4e4: sd(ln|Q|) falls from l=0 to l=1 by >= 3 bootstrap se for claimed (b),(c),(d), not for exact (a),(c)",
        pass,
        details.join("; "),
    );
}
