//! Dense symmetric positive-definite matrix utilities.
//!
//! Storage and products use `nalgebra::DMatrix`; factorization, inversion
//! and Schur complements go through the Cholesky routine below. Storage
//! indices are 0-based. Functions that take *node sets* (Schur complement
//! blocks, pattern graphs) use the 1-based node labels of [`Graph`].

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default absolute tolerance below which off-pattern entries are zeroed.
pub const PATTERN_ATOL: f64 = 1e-9;

const SYMMETRY_RTOL: f64 = 1e-12;

/// Dense symmetric matrix. Symmetry is exact: constructors average the two
/// triangles after checking they agree to within a relative 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        let asym = max_asymmetry(&m);
        if !(asym <= SYMMETRY_RTOL * (1.0 + max_abs(&m))) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(SymMatrix(symmetrized(m)))
    }

    /// Wraps a matrix already known to be symmetric up to rounding, forcing
    /// exact symmetry.
    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        SymMatrix(symmetrized(m))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.iter().map(|r| r.len()).find(|&l| l != n).unwrap_or(n),
            });
        }
        SymMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// Principal submatrix on 0-based indices.
    pub(crate) fn principal(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.0[(idx[a], idx[b])])
    }

    pub(crate) fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| self.0[(rows[a], cols[b])])
    }

    /// Overwrites the principal block on `idx` (0-based) with a symmetric
    /// block, writing both triangles from the lower one.
    pub(crate) fn set_principal(&mut self, idx: &[usize], block: &DMatrix<f64>) {
        for a in 0..idx.len() {
            for b in 0..=a {
                let v = if a == b {
                    block[(a, a)]
                } else {
                    0.5 * (block[(a, b)] + block[(b, a)])
                };
                self.0[(idx[a], idx[b])] = v;
                self.0[(idx[b], idx[a])] = v;
            }
        }
    }

    /// Returns `P M Pᵀ` where row `k` of the result is row `perm[k]` of `self`.
    pub(crate) fn permuted(&self, perm: &[usize]) -> SymMatrix {
        SymMatrix(self.principal(perm))
    }
}

pub(crate) fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factors the lower triangle of `m`. Fails when a pivot is not strictly positive.
    pub(crate) fn factor(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let mut l = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn into_l(self) -> DMatrix<f64> {
        self.l
    }

    pub fn logdet(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves `L Lᵀ X = B` in place.
    pub fn solve_in_place(&self, b: &mut DMatrix<f64>) {
        let n = self.l.nrows();
        for c in 0..b.ncols() {
            for i in 0..n {
                let mut s = b[(i, c)];
                for k in 0..i {
                    s -= self.l[(i, k)] * b[(k, c)];
                }
                b[(i, c)] = s / self.l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = b[(i, c)];
                for k in (i + 1)..n {
                    s -= self.l[(k, i)] * b[(k, c)];
                }
                b[(i, c)] = s / self.l[(i, i)];
            }
        }
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.l.nrows();
        let mut x = DMatrix::identity(n, n);
        self.solve_in_place(&mut x);
        SymMatrix::from_symmetric_unchecked(x)
    }
}

/// Cholesky factorization of a symmetric matrix.
pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    Cholesky::factor(&m.0)
}

pub fn inverse(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(cholesky(m)?.inverse())
}

pub fn logdet(m: &SymMatrix) -> Result<f64> {
    Ok(cholesky(m)?.logdet())
}

pub fn trace(m: &SymMatrix) -> f64 {
    m.trace()
}

fn complement(dim: usize, idx: &[usize]) -> Vec<usize> {
    (0..dim).filter(|i| !idx.contains(i)).collect()
}

fn nodes_to_indices(dim: usize, nodes: &[usize]) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = Vec::with_capacity(nodes.len());
    for &v in nodes {
        if !(1..=dim).contains(&v) {
            return Err(Error::NodeOutOfRange { node: v, p: dim });
        }
        if !idx.contains(&(v - 1)) {
            idx.push(v - 1);
        }
    }
    idx.sort_unstable();
    Ok(idx)
}

/// `Q_{C,R} (Q_{R,R})⁻¹ Q_{R,C}` for 0-based `block` and `R` its complement.
/// Zero when `R` is empty.
pub(crate) fn conditional_shift(q: &SymMatrix, block: &[usize]) -> Result<DMatrix<f64>> {
    let rest = complement(q.dim(), block);
    if rest.is_empty() {
        return Ok(DMatrix::zeros(block.len(), block.len()));
    }
    let chol = Cholesky::factor(&q.principal(&rest))?;
    let q_rc = q.block(&rest, block);
    let x = chol.solve(&q_rc);
    Ok(q_rc.transpose() * x)
}

/// Schur complement of `Q_{C,C}` in `Q` for a node set `C` (1-based labels),
/// returned as a `|C| × |C|` matrix over `C` in ascending label order.
pub fn schur_complement(q: &SymMatrix, nodes: &[usize]) -> Result<SymMatrix> {
    let idx = nodes_to_indices(q.dim(), nodes)?;
    if idx.is_empty() || idx.len() == q.dim() {
        return Err(Error::InvalidIndexSet(q.dim()));
    }
    let shift = conditional_shift(q, &idx)?;
    Ok(SymMatrix::from_symmetric_unchecked(q.principal(&idx) - shift))
}

/// Symmetric positive-definite matrix whose off-pattern entries are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedMatrix {
    matrix: SymMatrix,
    graph: Arc<Graph>,
}

impl ConstrainedMatrix {
    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Entry at 1-based `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let p = self.dim();
        for v in [i, j] {
            if !(1..=p).contains(&v) {
                return Err(Error::NodeOutOfRange { node: v, p });
            }
        }
        Ok(self.matrix.get(i - 1, j - 1))
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut SymMatrix {
        &mut self.matrix
    }
}

/// Validates `m` against the sparsity pattern of `graph` with the default tolerance.
pub fn enforce_pattern(m: SymMatrix, graph: Arc<Graph>) -> Result<ConstrainedMatrix> {
    enforce_pattern_with(m, graph, PATTERN_ATOL)
}

/// Zeroes off-pattern entries with `|m_ij| <= atol`, reports larger ones
/// (1-based `(i, j, value)`, `i < j`), then checks positive definiteness.
pub fn enforce_pattern_with(
    m: SymMatrix,
    graph: Arc<Graph>,
    atol: f64,
) -> Result<ConstrainedMatrix> {
    let p = m.dim();
    if graph.p() != p {
        return Err(Error::DimensionMismatch {
            expected: graph.p(),
            got: p,
        });
    }
    let mut raw = m.into_matrix();
    let mut violations = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if graph.allows0(i, j) {
                continue;
            }
            let v = raw[(i, j)];
            if v.abs() <= atol {
                raw[(i, j)] = 0.0;
                raw[(j, i)] = 0.0;
            } else {
                violations.push((i + 1, j + 1, v));
            }
        }
    }
    if !violations.is_empty() {
        return Err(Error::PatternViolation(violations));
    }
    Cholesky::factor(&raw)?;
    Ok(ConstrainedMatrix {
        matrix: SymMatrix(raw),
        graph,
    })
}

/// Row-major CSV with 17 significant digits per entry.
pub fn to_csv(m: &SymMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if j > 0 {
                s.push(',');
            }
            write!(s, "{:.16e}", m.get(i, j)).expect("write to string");
        }
        s.push('\n');
    }
    s
}

/// Parses a square matrix written by [`to_csv`]. `#` lines are skipped.
pub fn from_csv(text: &str) -> Result<SymMatrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number {f:?}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    SymMatrix::from_rows(&refs)
}
