use nalgebra::{DMatrix, DVector};

use super::GWishartParams;
use crate::error::{Error, Result};
use crate::matrix::{enforce_pattern, Cholesky, ConstrainedMatrix, SymMatrix};
use crate::rng::RngStream;

/// Exact sampler for G-Wishart laws on decomposable graphs.
///
/// Nodes are relabelled so that the identity is a perfect ordering. Peeling
/// off the last node `k` of the leading `(k+1)`-node subgraph with lower
/// neighbour set `N` (a clique), the diagonal entry `q` and free entries
/// `x = Q[N, k]` satisfy
///
/// ```text
/// q       ~ Gamma(shape (δ + |N|)/2, rate (d_kk - d_Nᵀ D_NN⁻¹ d_N)/2)
/// x | q   ~ Normal(-q D_NN⁻¹ d_N, q D_NN⁻¹)
/// ```
///
/// and the Schur complement of the leading block is an independent G-Wishart
/// draw on the remaining subgraph. Assembly adds `x xᵀ / q` back onto the
/// leading block.
#[derive(Clone, Debug)]
pub struct ExactSampler {
    params: GWishartParams,
    /// `order[k]` is the original 0-based node placed at position `k`.
    order: Vec<usize>,
    steps: Vec<NodeStep>,
}

#[derive(Clone, Debug)]
struct NodeStep {
    /// Lower neighbours, in permuted positions.
    nbrs: Vec<usize>,
    shape: f64,
    rate: f64,
    /// `D_NN⁻¹ d_N`
    mean_dir: DVector<f64>,
    /// Cholesky factor of `D_NN⁻¹`.
    cov_chol: DMatrix<f64>,
}

impl ExactSampler {
    pub fn new(params: &GWishartParams) -> Result<Self> {
        let graph = params.graph();
        let ordering = graph.perfect_ordering().ok_or(Error::NotDecomposable)?;
        let order: Vec<usize> = ordering.as_slice().iter().map(|v| v - 1).collect();
        let d = params.d().permuted(&order);
        let delta = params.delta();

        let mut steps = Vec::with_capacity(order.len());
        for k in 0..order.len() {
            let nbrs: Vec<usize> = (0..k)
                .filter(|&j| graph.adjacent0(order[j], order[k]))
                .collect();
            let d_kk = d.get(k, k);
            let step = if nbrs.is_empty() {
                NodeStep {
                    nbrs,
                    shape: 0.5 * delta,
                    rate: 0.5 * d_kk,
                    mean_dir: DVector::zeros(0),
                    cov_chol: DMatrix::zeros(0, 0),
                }
            } else {
                let d_nn = d.principal(&nbrs);
                let d_n = DVector::from_iterator(nbrs.len(), nbrs.iter().map(|&j| d.get(j, k)));
                let inv = Cholesky::factor(&d_nn)?.inverse();
                let mean_dir = inv.as_matrix() * &d_n;
                let conditional = d_kk - d_n.dot(&mean_dir);
                if !(conditional > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                NodeStep {
                    shape: 0.5 * (delta + nbrs.len() as f64),
                    rate: 0.5 * conditional,
                    mean_dir,
                    cov_chol: Cholesky::factor(inv.as_matrix())?.into_l(),
                    nbrs,
                }
            };
            steps.push(step);
        }
        Ok(ExactSampler {
            params: params.clone(),
            order,
            steps,
        })
    }

    pub fn params(&self) -> &GWishartParams {
        &self.params
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<ConstrainedMatrix> {
        let p = self.order.len();
        // Draw the last node first, matching the recursion's order of draws.
        let mut draws: Vec<(f64, DVector<f64>)> = Vec::with_capacity(p);
        for step in self.steps.iter().rev() {
            let q = rng.gamma(step.shape, step.rate)?;
            let m = step.nbrs.len();
            let z = DVector::from_iterator(m, (0..m).map(|_| rng.standard_normal()));
            let x = -q * &step.mean_dir + q.sqrt() * (&step.cov_chol * z);
            draws.push((q, x));
        }
        draws.reverse();

        let mut full = DMatrix::zeros(p, p);
        for (k, (step, (q, x))) in self.steps.iter().zip(&draws).enumerate() {
            // leading k×k block currently holds the Schur complement; add x xᵀ / q
            for (a, &i) in step.nbrs.iter().enumerate() {
                for (b, &j) in step.nbrs.iter().enumerate() {
                    full[(i, j)] += x[a] * x[b] / q;
                }
                full[(i, k)] = x[a];
                full[(k, i)] = x[a];
            }
            full[(k, k)] = *q;
        }

        let mut original = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in 0..p {
                original[(self.order[a], self.order[b])] = full[(a, b)];
            }
        }
        enforce_pattern(
            SymMatrix::from_symmetric_unchecked(original),
            self.params.graph().clone(),
        )
    }
}

/// One exact draw from `W_G(δ, D)` for decomposable `G`.
pub fn sample_exact_decomposable(
    params: &GWishartParams,
    rng: &mut RngStream,
) -> Result<ConstrainedMatrix> {
    ExactSampler::new(params)?.sample(rng)
}
