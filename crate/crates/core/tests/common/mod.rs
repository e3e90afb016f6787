#![allow(dead_code)]

use gwtest::mcmc::{Kernel, MetropolisHastings, Proposal};
use gwtest::{Result, RngStream};

/// Proposal on `0..n` given by a row-stochastic matrix.
#[derive(Clone, Debug)]
pub struct TableProposal {
    pub probs: Vec<Vec<f64>>,
}

impl TableProposal {
    pub fn new(probs: Vec<Vec<f64>>) -> Self {
        for row in &probs {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "row sums to {total}");
        }
        TableProposal { probs }
    }

    /// Normalizes each row of nonnegative weights.
    pub fn from_weights(weights: Vec<Vec<f64>>) -> Self {
        let probs = weights
            .into_iter()
            .map(|row| {
                let total: f64 = row.iter().sum();
                row.into_iter().map(|w| w / total).collect()
            })
            .collect();
        TableProposal::new(probs)
    }
}

impl Proposal<usize> for TableProposal {
    fn propose(&self, from: &usize, rng: &mut RngStream) -> usize {
        let u = rng.uniform01();
        let row = &self.probs[*from];
        let mut acc = 0.0;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        row.iter().rposition(|&p| p > 0.0).unwrap()
    }

    fn log_density(&self, from: &usize, to: &usize) -> f64 {
        self.probs[*from][*to].ln()
    }

    fn support(&self, from: &usize) -> Option<Vec<(usize, f64)>> {
        Some(
            self.probs[*from]
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, &p)| (j, p))
                .collect(),
        )
    }
}

/// Metropolis–Hastings kernel for target weights `w` on `0..n`.
pub fn mh_kernel(name: &str, weights: Vec<f64>, proposal: TableProposal) -> Box<dyn Kernel<usize>> {
    Box::new(MetropolisHastings::new(
        name,
        move |x: &usize| weights[*x].ln(),
        proposal,
    ))
}

/// Heat-bath update of one coordinate of a state in a finite product space.
pub struct HeatBath {
    pub coordinate: usize,
    pub sizes: Vec<usize>,
    pub weight: fn(&[usize]) -> f64,
}

impl HeatBath {
    fn conditional(&self, x: &[usize]) -> Vec<(Vec<usize>, f64)> {
        let candidates: Vec<Vec<usize>> = (0..self.sizes[self.coordinate])
            .map(|v| {
                let mut y = x.to_vec();
                y[self.coordinate] = v;
                y
            })
            .collect();
        let total: f64 = candidates.iter().map(|y| (self.weight)(y)).sum();
        candidates
            .into_iter()
            .map(|y| {
                let w = (self.weight)(&y) / total;
                (y, w)
            })
            .collect()
    }
}

impl Kernel<Vec<usize>> for HeatBath {
    fn step(&self, state: &mut Vec<usize>, rng: &mut RngStream) -> Result<()> {
        let u = rng.uniform01();
        let mut acc = 0.0;
        let law = self.conditional(state);
        let last = law.len() - 1;
        for (k, (y, p)) in law.into_iter().enumerate() {
            acc += p;
            if u < acc || k == last {
                *state = y;
                break;
            }
        }
        Ok(())
    }

    fn name(&self) -> String {
        format!("heat-bath[{}]", self.coordinate)
    }

    fn transition_law(&self, state: &Vec<usize>) -> Option<Vec<(Vec<usize>, f64)>> {
        Some(self.conditional(state))
    }
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Two-sample Welch z-score of the difference in means.
pub fn mean_z(a: &[f64], b: &[f64]) -> f64 {
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var / n)
    };
    let (ma, va) = stats(a);
    let (mb, vb) = stats(b);
    (ma - mb) / (va + vb).sqrt()
}
