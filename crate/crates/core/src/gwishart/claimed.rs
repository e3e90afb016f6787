use nalgebra::DMatrix;

use super::{GWishartParams, WishartSampler};
use crate::error::{Error, Result};
use crate::matrix::{conditional_shift, enforce_pattern_with, max_abs, Cholesky, ConstrainedMatrix, SymMatrix, PATTERN_ATOL};
use crate::rng::RngStream;

/// Starting iterate of the fixed-point sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FixedPointInit {
    /// The initial Wishart draw with off-pattern entries set to zero, or the
    /// identity when that matrix is not positive definite.
    #[default]
    WishartZeroed,
    Identity,
}

impl std::str::FromStr for FixedPointInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wishart-zeroed" => Ok(FixedPointInit::WishartZeroed),
            "identity" => Ok(FixedPointInit::Identity),
            _ => Err(Error::Parse(format!("unknown fixed-point init {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimedOptions {
    pub init: FixedPointInit,
    /// Sweeps stop once the max-abs change is at most `rtol * (1 + max|Q|)`.
    pub rtol: f64,
    pub max_sweeps: usize,
    /// Off-pattern tolerance for the final pattern check.
    pub atol: f64,
}

impl Default for ClaimedOptions {
    fn default() -> Self {
        ClaimedOptions {
            init: FixedPointInit::WishartZeroed,
            rtol: 1e-13,
            max_sweeps: 10_000,
            atol: PATTERN_ATOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceInfo {
    pub sweeps: usize,
    pub final_change: f64,
    pub converged: bool,
}

/// The claimed general G-Wishart sampler.
///
/// Draws `Q̃ ~ W(δ, D)`, sets `Σ = Q̃⁻¹` and solves
/// `Q[C,C] = Σ[C,C]⁻¹ + Q[C,R] Q[R,R]⁻¹ Q[R,C]` (`R = V \ C`) jointly over
/// all maximal cliques `C` by repeated sweeps in canonical clique order.
/// Draws that hit the sweep cap are returned with `converged = false`.
#[derive(Clone, Debug)]
pub struct ClaimedSampler {
    params: GWishartParams,
    wishart: WishartSampler,
    cliques: Vec<Vec<usize>>,
    options: ClaimedOptions,
}

impl ClaimedSampler {
    pub fn new(params: &GWishartParams, options: ClaimedOptions) -> Result<Self> {
        let cliques = params
            .graph()
            .maximal_cliques()
            .into_iter()
            .map(|c| c.into_iter().map(|v| v - 1).collect())
            .collect();
        Ok(ClaimedSampler {
            wishart: WishartSampler::new(params.delta(), params.d())?,
            params: params.clone(),
            cliques,
            options,
        })
    }

    pub fn params(&self) -> &GWishartParams {
        &self.params
    }

    pub fn options(&self) -> &ClaimedOptions {
        &self.options
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<(ConstrainedMatrix, ConvergenceInfo)> {
        let wishart_draw = self.wishart.sample(rng)?;
        self.solve(&wishart_draw)
    }

    /// Runs the fixed-point iteration for a given Wishart draw `Q̃`.
    pub fn solve(&self, wishart_draw: &SymMatrix) -> Result<(ConstrainedMatrix, ConvergenceInfo)> {
        let graph = self.params.graph();
        let p = self.params.p();
        let sigma = Cholesky::factor(wishart_draw.as_matrix())?.inverse();
        let targets = self
            .cliques
            .iter()
            .map(|c| Ok(Cholesky::factor(&sigma.principal(c))?.inverse().into_matrix()))
            .collect::<Result<Vec<DMatrix<f64>>>>()?;

        let mut q = match self.options.init {
            FixedPointInit::WishartZeroed => {
                let mut m = wishart_draw.as_matrix().clone();
                for i in 0..p {
                    for j in 0..p {
                        if !graph.allows0(i, j) {
                            m[(i, j)] = 0.0;
                        }
                    }
                }
                // Zeroing entries can break positive definiteness; the fixed
                // point does not depend on the start, so use the identity then.
                if Cholesky::factor(&m).is_ok() {
                    SymMatrix::from_symmetric_unchecked(m)
                } else {
                    SymMatrix::identity(p)
                }
            }
            FixedPointInit::Identity => SymMatrix::identity(p),
        };

        let mut info = ConvergenceInfo {
            sweeps: 0,
            final_change: f64::INFINITY,
            converged: false,
        };
        while info.sweeps < self.options.max_sweeps {
            let previous = q.as_matrix().clone();
            for (clique, target) in self.cliques.iter().zip(&targets) {
                let block = target + conditional_shift(&q, clique)?;
                q.set_principal(clique, &block);
            }
            info.sweeps += 1;
            info.final_change = max_abs(&(q.as_matrix() - previous));
            if info.final_change <= self.options.rtol * (1.0 + q.max_abs()) {
                info.converged = true;
                break;
            }
        }
        let q = enforce_pattern_with(q, graph.clone(), self.options.atol)?;
        Ok((q, info))
    }
}

/// One draw of the claimed sampler with default options.
pub fn sample_claimed(
    params: &GWishartParams,
    rng: &mut RngStream,
) -> Result<(ConstrainedMatrix, ConvergenceInfo)> {
    ClaimedSampler::new(params, ClaimedOptions::default())?.sample(rng)
}

/// Max-abs residual of the fixed-point equations over all maximal cliques.
pub fn fixed_point_residual(q: &ConstrainedMatrix, sigma: &SymMatrix) -> Result<f64> {
    let mut worst = 0.0f64;
    for clique in q.graph().maximal_cliques() {
        let idx: Vec<usize> = clique.iter().map(|v| v - 1).collect();
        let target = Cholesky::factor(&sigma.principal(&idx))?.inverse();
        let rhs = target.as_matrix() + conditional_shift(q.matrix(), &idx)?;
        worst = worst.max(max_abs(&(q.matrix().principal(&idx) - rhs)));
    }
    Ok(worst)
}
