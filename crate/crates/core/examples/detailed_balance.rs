//! Metropolis-Hastings on a three-state target. Each kernel, the random
//! update and the random permutation of the two are reversible; a fixed
//! sweep of the two is not.

use gwtest::mcmc::{
    detailed_balance_residual, random_permutation_kernel, random_update_kernel, transition_matrix,
    Kernel, MetropolisHastings, Proposal,
};
use gwtest::RngStream;

struct Table(Vec<Vec<f64>>);

impl Proposal<usize> for Table {
    fn propose(&self, from: &usize, rng: &mut RngStream) -> usize {
        let u = rng.uniform01();
        let mut acc = 0.0;
        for (to, &p) in self.0[*from].iter().enumerate() {
            acc += p;
            if u < acc {
                return to;
            }
        }
        self.0[*from].len() - 1
    }

    fn log_density(&self, from: &usize, to: &usize) -> f64 {
        self.0[*from][*to].ln()
    }

    fn support(&self, from: &usize) -> Option<Vec<(usize, f64)>> {
        Some(self.0[*from].iter().cloned().enumerate().collect())
    }
}

const WEIGHTS: [f64; 3] = [1.0, 2.5, 4.0];

fn kernels() -> Vec<Box<dyn Kernel<usize>>> {
    let target = |x: &usize| WEIGHTS[*x].ln();
    vec![
        Box::new(MetropolisHastings::new(
            "k1",
            target,
            Table(vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.2, 0.3], vec![0.25, 0.25, 0.5]]),
        )),
        Box::new(MetropolisHastings::new(
            "k2",
            target,
            Table(vec![vec![0.3, 0.3, 0.4], vec![0.7, 0.1, 0.2], vec![0.2, 0.6, 0.2]]),
        )),
    ]
}

fn product(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn main() -> gwtest::Result<()> {
    let total: f64 = WEIGHTS.iter().sum();
    let pi: Vec<f64> = WEIGHTS.iter().map(|w| w / total).collect();
    let states = [0usize, 1, 2];

    let single = kernels();
    let p1 = transition_matrix(&single[0], &states).expect("finite kernel");
    let p2 = transition_matrix(&single[1], &states).expect("finite kernel");
    let ru = transition_matrix(&random_update_kernel(kernels())?, &states).expect("finite kernel");
    let rp = transition_matrix(&random_permutation_kernel(kernels())?, &states).expect("finite kernel");

    for (name, p) in [("k1", &p1), ("k2", &p2), ("random update", &ru), ("random permutation", &rp)] {
        println!("{name:<20} residual {:.2e}", detailed_balance_residual(&pi, p));
    }
    println!("{:<20} residual {:.2e}", "fixed sweep k1 k2", detailed_balance_residual(&pi, &product(&p1, &p2)));
    Ok(())
}
