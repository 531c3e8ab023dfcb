//! Dense real linear algebra with an explicit rank-tolerance policy.
//!
//! Matrices are nalgebra types. The SVD is faer's: nalgebra's Golub–Kahan
//! sweep returns wrong factors on some exactly rank-deficient inputs, which
//! snapshot matrices of repeated-spectrum systems routinely are. The
//! symmetric eigensolver is nalgebra's. Every routine agrees on one
//! truncation rule: a singular value counts toward the numeric rank only if
//! it exceeds the resolved cutoff.

use faer::Mat;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};

/// Real matrix of doubles. Storage is nalgebra's column-major layout; the
/// file formats in the CLI crate read and write row-major.
pub type DenseMatrix = DMatrix<f64>;

/// Real column vector.
pub type Vector = DVector<f64>;

/// Default relative rank threshold: singular values at or below
/// `1e-9 * sigma_max` are treated as zero.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;

/// Relative asymmetry `||M - M^T||_F / ||M||_F` accepted as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

const EIGEN_ITERATIONS_PER_DIM: usize = 1000;

fn to_faer(m: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// How singular values are compared against zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Keep `sigma > tol * sigma_max`.
    Relative(f64),
    /// Keep `sigma > tol`.
    Absolute(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Relative(DEFAULT_RANK_TOLERANCE)
    }
}

impl Tolerance {
    /// Absolute cutoff for a matrix whose largest singular value is `sigma_max`.
    pub fn cutoff(self, sigma_max: f64) -> f64 {
        match self {
            Tolerance::Relative(t) => t * sigma_max,
            Tolerance::Absolute(t) => t,
        }
    }

    pub fn validate(self) -> Result<()> {
        let t = match self {
            Tolerance::Relative(t) | Tolerance::Absolute(t) => t,
        };
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("rank tolerance must be finite and >= 0, got {t}")));
        }
        Ok(())
    }
}

/// Economic SVD truncated to the numerically nonzero singular values.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// Left singular vectors, `m x r`.
    pub u: DenseMatrix,
    /// Retained singular values, nonincreasing, all above `rank_tolerance`.
    pub singular_values: Vector,
    /// Right singular vectors, `n x r`.
    pub v: DenseMatrix,
    pub numeric_rank: usize,
    /// Absolute cutoff that was applied.
    pub rank_tolerance: f64,
    /// Largest singular value of the input, retained or not.
    pub sigma_max: f64,
}

impl SvdFactors {
    fn empty(rows: usize, cols: usize, cutoff: f64) -> Self {
        SvdFactors {
            u: DenseMatrix::zeros(rows, 0),
            singular_values: Vector::zeros(0),
            v: DenseMatrix::zeros(cols, 0),
            numeric_rank: 0,
            rank_tolerance: cutoff,
            sigma_max: 0.0,
        }
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn cols(&self) -> usize {
        self.v.nrows()
    }

    /// `U diag(sigma) V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// `V diag(1/sigma) U^T`; truncated directions stay zero.
    pub fn pseudo_inverse(&self) -> DenseMatrix {
        let mut vs = self.v.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            vs.column_mut(j).scale_mut(1.0 / *s);
        }
        vs * self.u.transpose()
    }

    /// Orthogonal projector `U U^T` onto the retained column space.
    pub fn range_projector(&self) -> DenseMatrix {
        &self.u * self.u.transpose()
    }

    /// Orthogonal projector `I - U U^T` onto the left nullspace.
    pub fn complement_projector(&self) -> DenseMatrix {
        DenseMatrix::identity(self.rows(), self.rows()) - self.range_projector()
    }
}

/// Rejects NaN and infinite entries.
pub fn ensure_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    match m.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(idx) => {
            let (r, c) = (idx % m.nrows(), idx / m.nrows());
            Err(invalid(format!("{what} has non-finite entry at ({r}, {c})")))
        }
    }
}

pub fn ensure_finite_vector(v: &Vector, what: &str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(i) => Err(invalid(format!("{what} has non-finite entry at index {i}"))),
    }
}

/// Truncated economic SVD.
pub fn svd(m: &DenseMatrix, tolerance: Tolerance) -> Result<SvdFactors> {
    ensure_finite(m, "matrix")?;
    tolerance.validate()?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(SvdFactors::empty(rows, cols, tolerance.cutoff(0.0)));
    }
    let dec = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD of {rows}x{cols} matrix did not converge: {e:?}")))?;
    let (u, sigma, v) = (dec.U(), dec.S(), dec.V());
    let sigma_max = sigma[0];
    let cutoff = tolerance.cutoff(sigma_max);
    let rank = (0..sigma.dim()).take_while(|&i| sigma[i] > cutoff).count();
    Ok(SvdFactors {
        u: DenseMatrix::from_fn(rows, rank, |i, j| u[(i, j)]),
        singular_values: Vector::from_fn(rank, |i, _| sigma[i]),
        v: DenseMatrix::from_fn(cols, rank, |i, j| v[(i, j)]),
        numeric_rank: rank,
        rank_tolerance: cutoff,
        sigma_max,
    })
}

/// Moore–Penrose pseudo-inverse through the truncated SVD.
pub fn pseudo_inverse(m: &DenseMatrix, tolerance: Tolerance) -> Result<DenseMatrix> {
    Ok(svd(m, tolerance)?.pseudo_inverse())
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numeric_rank(m: &DenseMatrix, rel_tol: f64) -> Result<usize> {
    Ok(svd(m, Tolerance::Relative(rel_tol))?.numeric_rank)
}

/// Largest singular value.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    ensure_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let sigma = to_faer(m)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    Ok(sigma.into_iter().fold(0.0, f64::max))
}

/// `sqrt(Tr(M^T M))`.
pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    m.norm()
}

/// `||M - M^T||_F <= tol * ||M||_F`. Non-square matrices are never symmetric.
pub fn is_symmetric(m: &DenseMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).norm() <= tol * m.norm()
}

/// Full eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricDecomposition {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DenseMatrix,
}

impl SymmetricDecomposition {
    pub fn reconstruct(&self) -> DenseMatrix {
        let lambda = DenseMatrix::from_diagonal(&Vector::from_vec(self.eigenvalues.clone()));
        &self.eigenvectors * lambda * self.eigenvectors.transpose()
    }
}

pub fn symmetric_eigendecomposition(m: &DenseMatrix) -> Result<SymmetricDecomposition> {
    ensure_finite(m, "matrix")?;
    if !m.is_square() {
        return Err(invalid(format!("eigendecomposition needs a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if !is_symmetric(m, SYMMETRY_TOLERANCE) {
        return Err(invalid("matrix is not symmetric"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SymmetricDecomposition { eigenvalues: vec![], eigenvectors: DenseMatrix::zeros(0, 0) });
    }
    let sym = (m + m.transpose()) * 0.5;
    let max_iter = EIGEN_ITERATIONS_PER_DIM * (n + 1);
    let dec = SymmetricEigen::try_new(sym, f64::EPSILON, max_iter)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |r, c| dec.eigenvectors[(r, order[c])]);
    Ok(SymmetricDecomposition { eigenvalues, eigenvectors })
}

/// Orthonormal basis (`n x (n - r)`) of the orthogonal complement of the
/// span of the orthonormal columns of `basis`.
pub fn orthogonal_complement(basis: &DenseMatrix) -> Result<DenseMatrix> {
    let n = basis.nrows();
    let r = basis.ncols();
    if r > n {
        return Err(invalid("basis has more columns than rows"));
    }
    if r == 0 {
        return Ok(DenseMatrix::identity(n, n));
    }
    if r == n {
        return Ok(DenseMatrix::zeros(n, 0));
    }
    let projector = DenseMatrix::identity(n, n) - basis * basis.transpose();
    let dec = symmetric_eigendecomposition(&projector)?;
    // eigenvalues of a projector are 0 or 1; take the unit ones
    let keep: Vec<usize> = (0..n).filter(|&i| dec.eigenvalues[i] > 0.5).collect();
    if keep.len() != n - r {
        return Err(Error::Numerical(format!(
            "complement has dimension {} but expected {}; basis columns are not orthonormal",
            keep.len(),
            n - r
        )));
    }
    Ok(DenseMatrix::from_fn(n, keep.len(), |i, j| dec.eigenvectors[(i, keep[j])]))
}
