//! G-Wishart law `W_G(δ, D)` with density proportional to
//! `|Q|^(δ/2 - 1) exp(-tr(QD)/2)` on positive-definite `Q` that vanish off the
//! edges of `G`, together with its samplers:
//!
//! * [`sample_wishart`]: complete-graph case, Bartlett construction;
//! * [`sample_exact_decomposable`]: exact node-by-node recursion along a
//!   perfect ordering (decomposable graphs only);
//! * [`sample_claimed`]: the fixed-point sampler under test;
//! * [`gibbs_clique_update`]: draw of a clique block from its full conditional.
//!
//! The normalizing constant is never computed.

mod claimed;
mod exact;
mod gibbs;
mod wishart;

use std::sync::Arc;

pub use claimed::{
    fixed_point_residual, sample_claimed, ClaimedOptions, ClaimedSampler, ConvergenceInfo,
    FixedPointInit,
};
pub use exact::{sample_exact_decomposable, ExactSampler};
pub use gibbs::{clique_kernels, gibbs_clique_update, CliqueGibbs};
pub use wishart::{sample_wishart, WishartSampler};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{cholesky, ConstrainedMatrix, SymMatrix};

/// Parameters `(δ, D, G)` of a G-Wishart law.
#[derive(Clone, Debug)]
pub struct GWishartParams {
    delta: f64,
    d: SymMatrix,
    graph: Arc<Graph>,
}

impl GWishartParams {
    pub fn new(delta: f64, d: SymMatrix, graph: Arc<Graph>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
        }
        if d.dim() != graph.p() {
            return Err(Error::DimensionMismatch {
                expected: graph.p(),
                got: d.dim(),
            });
        }
        cholesky(&d)?;
        Ok(GWishartParams { delta, d, graph })
    }

    /// `δ` and `D = I`, the setting used throughout the experiments.
    pub fn with_identity(delta: f64, graph: Arc<Graph>) -> Result<Self> {
        let p = graph.p();
        GWishartParams::new(delta, SymMatrix::identity(p), graph)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d(&self) -> &SymMatrix {
        &self.d
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn p(&self) -> usize {
        self.graph.p()
    }
}

/// `(δ/2 - 1) ln|Q| - tr(QD)/2`, i.e. the log density without its normalizing constant.
pub fn log_density_unnormalized(q: &ConstrainedMatrix, params: &GWishartParams) -> Result<f64> {
    if q.graph().as_ref() != params.graph().as_ref() {
        return Err(Error::InvalidParameter("matrix pattern differs from the parameter graph".into()));
    }
    let logdet = cholesky(q.matrix())?.logdet();
    // tr(QD) = sum_ij Q_ij D_ji
    let tr_qd = q.matrix().as_matrix().component_mul(params.d().as_matrix()).sum();
    Ok((0.5 * params.delta() - 1.0) * logdet - 0.5 * tr_qd)
}
