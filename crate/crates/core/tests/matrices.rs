use std::sync::Arc;

use gwtest::graph::Graph;
use gwtest::matrix::{
    cholesky, enforce_pattern, from_csv, inverse, logdet, schur_complement, to_csv, SymMatrix,
};
use gwtest::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Random SPD matrix `A Aᵀ + I`.
fn arb_spd(max_p: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_p).prop_flat_map(|p| {
        proptest::collection::vec(-2.0f64..2.0, p * p).prop_map(move |v| {
            let a = DMatrix::from_vec(p, p, v);
            let m = &a * a.transpose() + DMatrix::identity(p, p);
            SymMatrix::new(m).unwrap()
        })
    })
}

fn spd_with_subset(min_p: usize, max_p: usize) -> impl Strategy<Value = (SymMatrix, Vec<usize>)> {
    arb_spd(max_p)
        .prop_filter("dimension", move |m| m.dim() >= min_p)
        .prop_flat_map(|m| {
            let p = m.dim();
            proptest::sample::subsequence((1..=p).collect::<Vec<_>>(), 1..p)
                .prop_map(move |c| (m.clone(), c))
        })
}

fn sub(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cholesky_reconstructs(m in arb_spd(8)) {
        let l = cholesky(&m).unwrap().into_l();
        let scale = 1.0 + m.max_abs();
        prop_assert!(max_abs(&(&l * l.transpose() - m.as_matrix())) <= 1e-12 * scale);
        let nalgebra_logdet = 2.0 * m.as_matrix().clone().cholesky().unwrap().l().diagonal().map(f64::ln).sum();
        prop_assert!((logdet(&m).unwrap() - nalgebra_logdet).abs() <= 1e-10 * (1.0 + nalgebra_logdet.abs()));
    }

    #[test]
    fn inverse_is_inverse(m in arb_spd(8)) {
        let inv = inverse(&m).unwrap();
        let p = m.dim();
        let prod = m.as_matrix() * inv.as_matrix();
        prop_assert!(max_abs(&(prod - DMatrix::identity(p, p))) <= 1e-9);
        prop_assert!((logdet(&m).unwrap() + logdet(&inv).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn schur_complement_identities((m, c) in spd_with_subset(2, 8)) {
        let p = m.dim();
        let s = schur_complement(&m, &c).unwrap();
        let ci: Vec<usize> = c.iter().map(|v| v - 1).collect();
        let ri: Vec<usize> = (0..p).filter(|i| !ci.contains(i)).collect();
        let q = m.as_matrix();

        // round trip: Q_CC = S + Q_CR Q_RR⁻¹ Q_RC
        let q_rr = sub(q, &ri, &ri);
        let q_rc = sub(q, &ri, &ci);
        let shift = q_rc.transpose() * q_rr.clone().try_inverse().unwrap() * &q_rc;
        let scale = 1.0 + m.max_abs();
        prop_assert!(max_abs(&(s.as_matrix() + shift - sub(q, &ci, &ci))) <= 1e-9 * scale);

        // (Q⁻¹)_CC = S⁻¹
        let inv = inverse(&m).unwrap();
        let s_inv = inverse(&s).unwrap();
        prop_assert!(max_abs(&(sub(inv.as_matrix(), &ci, &ci) - s_inv.as_matrix())) <= 1e-9 * (1.0 + s_inv.max_abs()));

        // ln|Q| = ln|Q_RR| + ln|S|
        let lhs = logdet(&m).unwrap();
        let rhs = logdet(&SymMatrix::new(q_rr).unwrap()).unwrap() + logdet(&s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn csv_round_trip_is_exact(m in arb_spd(6)) {
        prop_assert_eq!(from_csv(&to_csv(&m)).unwrap(), m);
    }

    #[test]
    fn pattern_enforcement(
        p in 2usize..7,
        bits in proptest::collection::vec(any::<bool>(), 21),
        vals in proptest::collection::vec(-1.0f64..1.0, 21),
    ) {
        let pairs: Vec<(usize, usize)> = (1..=p).flat_map(|i| ((i + 1)..=p).map(move |j| (i, j))).collect();
        let edges: Vec<(usize, usize)> = pairs.iter().zip(&bits).filter(|(_, &b)| b).map(|(e, _)| *e).collect();
        let g = Arc::new(Graph::new(p, edges.clone()).unwrap());
        // diagonally dominant, supported on the pattern
        let mut m = DMatrix::identity(p, p) * (p as f64 + 1.0);
        for ((i, j), v) in pairs.iter().zip(&vals) {
            if g.has_edge(*i, *j) {
                m[(i - 1, j - 1)] = *v;
                m[(j - 1, i - 1)] = *v;
            }
        }
        let ok = enforce_pattern(SymMatrix::new(m.clone()).unwrap(), g.clone());
        prop_assert!(ok.is_ok());
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| !g.has_edge(*i, *j)) {
            m[(i - 1, j - 1)] = 0.5;
            m[(j - 1, i - 1)] = 0.5;
            match enforce_pattern(SymMatrix::new(m).unwrap(), g) {
                Err(Error::PatternViolation(v)) => prop_assert_eq!(v, vec![(i, j, 0.5)]),
                other => prop_assert!(false, "expected a violation, got {:?}", other),
            }
        }
    }
}

#[test]
fn schur_complement_rejects_trivial_sets() {
    let m = SymMatrix::identity(3);
    assert_eq!(schur_complement(&m, &[]).unwrap_err(), Error::InvalidIndexSet(3));
    assert_eq!(schur_complement(&m, &[1, 2, 3]).unwrap_err(), Error::InvalidIndexSet(3));
    assert!(schur_complement(&m, &[4]).is_err());
}
