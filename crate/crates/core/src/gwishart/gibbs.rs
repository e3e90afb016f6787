use super::{GWishartParams, WishartSampler};
use crate::error::{Error, Result};
use crate::matrix::{conditional_shift, Cholesky, ConstrainedMatrix};
use crate::mcmc::Kernel;
use crate::rng::RngStream;

/// Gibbs update of the block `Q[C, C]` for a clique `C`.
///
/// The Schur complement of the block is drawn fresh from `W(δ, D[C, C])` and
/// the block is rebuilt as `Q*[C,C] + Q[C,R] Q[R,R]⁻¹ Q[R,C]` with `R = V \ C`.
/// Every entry outside the rows and columns of `C` is left untouched.
#[derive(Clone, Debug)]
pub struct CliqueGibbs {
    clique: Vec<usize>,
    idx: Vec<usize>,
    wishart: WishartSampler,
    p: usize,
}

impl CliqueGibbs {
    /// `clique` holds 1-based labels and must be a clique of the parameter graph.
    pub fn new(params: &GWishartParams, clique: &[usize]) -> Result<Self> {
        let graph = params.graph();
        if clique.is_empty() {
            return Err(Error::EmptyNodeSet);
        }
        if !graph.is_clique(clique)? {
            return Err(Error::NotAClique(clique.to_vec()));
        }
        let mut clique = clique.to_vec();
        clique.sort_unstable();
        clique.dedup();
        let idx: Vec<usize> = clique.iter().map(|v| v - 1).collect();
        let d_cc = crate::matrix::SymMatrix::from_symmetric_unchecked(params.d().principal(&idx));
        Ok(CliqueGibbs {
            wishart: WishartSampler::new(params.delta(), &d_cc)?,
            clique,
            idx,
            p: params.p(),
        })
    }

    pub fn clique(&self) -> &[usize] {
        &self.clique
    }

    pub fn update(&self, q: &mut ConstrainedMatrix, rng: &mut RngStream) -> Result<()> {
        if q.dim() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: q.dim(),
            });
        }
        let shift = conditional_shift(q.matrix(), &self.idx)?;
        let fresh = self.wishart.sample(rng)?;
        let block = fresh.as_matrix() + shift;
        let m = q.matrix_mut();
        m.set_principal(&self.idx, &block);
        // Schur complement is the fresh draw and Q[R,R] was factored above,
        // so only a numerically degenerate update can fail here.
        Cholesky::factor(m.as_matrix())?;
        Ok(())
    }
}

impl Kernel<ConstrainedMatrix> for CliqueGibbs {
    fn step(&self, state: &mut ConstrainedMatrix, rng: &mut RngStream) -> Result<()> {
        self.update(state, rng)
    }

    fn name(&self) -> String {
        let labels: Vec<String> = self.clique.iter().map(|v| v.to_string()).collect();
        format!("gibbs{{{}}}", labels.join(","))
    }
}

/// One Gibbs kernel per maximal clique, in canonical clique order.
pub fn clique_kernels(params: &GWishartParams) -> Result<Vec<CliqueGibbs>> {
    params
        .graph()
        .maximal_cliques()
        .iter()
        .map(|c| CliqueGibbs::new(params, c))
        .collect()
}

/// Returns `q` with its `clique` block redrawn from the full conditional.
pub fn gibbs_clique_update(
    q: &ConstrainedMatrix,
    clique: &[usize],
    params: &GWishartParams,
    rng: &mut RngStream,
) -> Result<ConstrainedMatrix> {
    let kernel = CliqueGibbs::new(params, clique)?;
    let mut next = q.clone();
    kernel.update(&mut next, rng)?;
    Ok(next)
}
