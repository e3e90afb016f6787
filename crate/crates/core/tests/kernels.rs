mod common;

use common::{mat_mul, max_abs_diff, mh_kernel, HeatBath, TableProposal};
use gwtest::mcmc::{
    detailed_balance_residual, random_permutation_kernel, random_update_kernel, run_chain,
    transition_matrix, Kernel, Record,
};
use gwtest::RngStream;
use proptest::prelude::*;

fn normalized(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn positive_row(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, n)
}

fn positive_table(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(positive_row(n), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mh_and_mixtures_are_reversible(
        weights in positive_row(3),
        prop1 in positive_table(3),
        prop2 in positive_table(3),
    ) {
        let states: Vec<usize> = (0..3).collect();
        let pi = normalized(&weights);
        let k1 = mh_kernel("k1", weights.clone(), TableProposal::from_weights(prop1.clone()));
        let k2 = mh_kernel("k2", weights.clone(), TableProposal::from_weights(prop2.clone()));
        let p1 = transition_matrix(k1.as_ref(), &states).unwrap();
        let p2 = transition_matrix(k2.as_ref(), &states).unwrap();
        for row in p1.iter().chain(&p2) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&x| x >= 0.0));
        }
        prop_assert!(detailed_balance_residual(&pi, &p1) <= 1e-12);
        prop_assert!(detailed_balance_residual(&pi, &p2) <= 1e-12);

        let ru = random_update_kernel(vec![
            mh_kernel("k1", weights.clone(), TableProposal::from_weights(prop1.clone())),
            mh_kernel("k2", weights.clone(), TableProposal::from_weights(prop2.clone())),
        ]).unwrap();
        let pru = transition_matrix(&ru, &states).unwrap();
        let mix: Vec<Vec<f64>> = p1.iter().zip(&p2)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
            .collect();
        prop_assert!(max_abs_diff(&pru, &mix) <= 1e-12);
        prop_assert!(detailed_balance_residual(&pi, &pru) <= 1e-12);

        let rp = random_permutation_kernel(vec![
            mh_kernel("k1", weights.clone(), TableProposal::from_weights(prop1)),
            mh_kernel("k2", weights, TableProposal::from_weights(prop2)),
        ]).unwrap();
        let prp = transition_matrix(&rp, &states).unwrap();
        let (a, b) = (mat_mul(&p1, &p2), mat_mul(&p2, &p1));
        let sym: Vec<Vec<f64>> = a.iter().zip(&b)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| 0.5 * (u + v)).collect())
            .collect();
        prop_assert!(max_abs_diff(&prp, &sym) <= 1e-12);
        prop_assert!(detailed_balance_residual(&pi, &prp) <= 1e-12);
    }

    #[test]
    fn stationarity_follows(weights in positive_row(4), prop in positive_table(4)) {
        let pi = normalized(&weights);
        let k = mh_kernel("k", weights, TableProposal::from_weights(prop));
        let p = transition_matrix(k.as_ref(), &[0usize, 1, 2, 3]).unwrap();
        for y in 0..4 {
            let flow: f64 = (0..4).map(|x| pi[x] * p[x][y]).sum();
            prop_assert!((flow - pi[y]).abs() <= 1e-12);
        }
    }
}

#[test]
fn fixed_order_sweep_need_not_be_reversible() {
    let weights = vec![1.0, 2.0, 4.0];
    let pi = normalized(&weights);
    let k1 = mh_kernel("k1", weights.clone(), TableProposal::new(vec![
        vec![0.0, 1.0, 0.0],
        vec![0.5, 0.0, 0.5],
        vec![0.0, 1.0, 0.0],
    ]));
    let k2 = mh_kernel("k2", weights, TableProposal::new(vec![
        vec![0.0, 0.0, 1.0],
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
    ]));
    let states = [0usize, 1, 2];
    let p = mat_mul(
        &transition_matrix(k1.as_ref(), &states).unwrap(),
        &transition_matrix(k2.as_ref(), &states).unwrap(),
    );
    // still stationary, but not in detailed balance
    for y in 0..3 {
        let flow: f64 = (0..3).map(|x| pi[x] * p[x][y]).sum();
        assert!((flow - pi[y]).abs() < 1e-12);
    }
    assert!(detailed_balance_residual(&pi, &p) > 1e-3);
}

#[test]
fn heat_bath_mixtures_are_reversible() {
    fn weight(x: &[usize]) -> f64 {
        [[1.0, 3.0], [2.0, 0.5], [0.7, 1.9]][x[0]][x[1]]
    }
    let sizes = vec![3, 2];
    let make = || -> Vec<Box<dyn Kernel<Vec<usize>>>> {
        (0..2)
            .map(|c| {
                Box::new(HeatBath {
                    coordinate: c,
                    sizes: sizes.clone(),
                    weight,
                }) as Box<dyn Kernel<Vec<usize>>>
            })
            .collect()
    };
    let states: Vec<Vec<usize>> = (0..3).flat_map(|a| (0..2).map(move |b| vec![a, b])).collect();
    let pi = normalized(&states.iter().map(|x| weight(x)).collect::<Vec<_>>());
    for kernel in [
        Box::new(random_update_kernel(make()).unwrap()) as Box<dyn Kernel<Vec<usize>>>,
        Box::new(random_permutation_kernel(make()).unwrap()),
    ] {
        let p = transition_matrix(kernel.as_ref(), &states).unwrap();
        assert!(detailed_balance_residual(&pi, &p) <= 1e-12, "{}", kernel.name());
    }
}

#[test]
fn simulated_steps_follow_the_reported_law() {
    let weights = vec![1.0, 2.0, 3.0];
    let proposal = vec![vec![0.2, 0.5, 0.3], vec![0.4, 0.2, 0.4], vec![0.6, 0.3, 0.1]];
    let kernel = random_permutation_kernel(vec![
        mh_kernel("k1", weights.clone(), TableProposal::new(proposal.clone())),
        mh_kernel("k2", weights, TableProposal::new(vec![vec![1.0 / 3.0; 3]; 3])),
    ])
    .unwrap();
    let p = transition_matrix(&kernel, &[0usize, 1, 2]).unwrap();
    let n = 200_000;
    for start in 0..3 {
        let mut rng = RngStream::substream(17, start as u64);
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let mut x = start;
            kernel.step(&mut x, &mut rng).unwrap();
            counts[x] += 1;
        }
        for y in 0..3 {
            let freq = counts[y] as f64 / n as f64;
            let se = (p[start][y] * (1.0 - p[start][y]) / n as f64).sqrt();
            assert!((freq - p[start][y]).abs() <= 5.0 * se + 1e-12, "{start}->{y}: {freq} vs {}", p[start][y]);
        }
    }
}

#[test]
fn long_chain_visits_states_in_proportion() {
    let weights = vec![1.0, 2.0, 5.0];
    let kernel = mh_kernel("k", weights.clone(), TableProposal::new(vec![vec![1.0 / 3.0; 3]; 3]));
    let mut rng = RngStream::substream(18, 0);
    let trace = run_chain(0usize, kernel.as_ref(), 300_000, &mut rng, Record::All, 0).unwrap();
    let pi = normalized(&weights);
    for y in 0..3 {
        let freq = trace.states.iter().filter(|&&x| x == y).count() as f64 / trace.states.len() as f64;
        assert!((freq - pi[y]).abs() < 0.01, "{y}: {freq} vs {}", pi[y]);
    }
}
