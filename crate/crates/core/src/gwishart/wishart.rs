use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{inverse, Cholesky, SymMatrix};
use crate::rng::RngStream;

/// Draws from `W(δ, D)`, the complete-graph G-Wishart law.
///
/// The density `|Q|^(δ/2-1) exp(-tr(QD)/2)` on `p × p` matrices is the
/// classical Wishart with `n = δ + p - 1` degrees of freedom and scale
/// `V = D⁻¹`; draws use the Bartlett factorization `Q = (L A)(L A)ᵀ` with
/// `L Lᵀ = V`, `A` lower triangular, `A_kk² ~ χ²(n - k)` (0-based `k`) and
/// standard normal entries below the diagonal.
#[derive(Clone, Debug)]
pub struct WishartSampler {
    delta: f64,
    scale_chol: DMatrix<f64>,
}

impl WishartSampler {
    pub fn new(delta: f64, d: &SymMatrix) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
        }
        let scale = inverse(d)?;
        let scale_chol = Cholesky::factor(scale.as_matrix())?.into_l();
        Ok(WishartSampler { delta, scale_chol })
    }

    pub fn dim(&self) -> usize {
        self.scale_chol.nrows()
    }

    pub fn degrees_of_freedom(&self) -> f64 {
        self.delta + self.dim() as f64 - 1.0
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<SymMatrix> {
        let p = self.dim();
        let n = self.degrees_of_freedom();
        let mut a = DMatrix::zeros(p, p);
        for k in 0..p {
            a[(k, k)] = rng.chi_square(n - k as f64)?.sqrt();
            for j in 0..k {
                a[(k, j)] = rng.standard_normal();
            }
        }
        let la = &self.scale_chol * a;
        Ok(SymMatrix::from_symmetric_unchecked(&la * la.transpose()))
    }
}

/// One draw from `W(δ, D)`.
pub fn sample_wishart(delta: f64, d: &SymMatrix, rng: &mut RngStream) -> Result<SymMatrix> {
    WishartSampler::new(delta, d)?.sample(rng)
}
