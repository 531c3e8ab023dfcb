//! Ground-truth linear systems `x_{t+1} = A x_t` and the spectral
//! bookkeeping that the symmetric-case analysis needs.

use crate::error::{invalid, Result};
use crate::linalg::{
    ensure_finite, ensure_finite_vector, is_symmetric, symmetric_eigendecomposition, DenseMatrix,
    SymmetricDecomposition, Vector, DEFAULT_RANK_TOLERANCE, SYMMETRY_TOLERANCE,
};
use crate::random;

/// Two computed eigenvalues belong to the same cluster when
/// `|a - b| <= CLUSTER_TOLERANCE * max(1, |a|)`.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// An initial-condition coefficient is nonzero when it exceeds
/// `COEFFICIENT_TOLERANCE * ||x0||`.
pub const COEFFICIENT_TOLERANCE: f64 = 1e-9;

/// Eigenvalues, eigenvectors and multiplicity structure of a symmetric
/// system matrix.
///
/// Eigenvalues are ordered by decreasing magnitude (positive before
/// negative on ties), so the eigenvectors of nonzero eigenvalues occupy the
/// leading `rank()` columns and the nullspace eigenvectors trail them.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
    distinct: Vec<f64>,
    multiplicities: Vec<usize>,
    group: Vec<usize>,
    rank: usize,
}

impl SpectralProfile {
    /// Profile of a spectrum known exactly: equal values form one group.
    pub fn from_exact(eigenvalues: &[f64], eigenvectors: &DenseMatrix) -> Result<Self> {
        Self::build(eigenvalues, eigenvectors, |a, b| a == b)
    }

    /// Profile of a numerically computed spectrum: values within the
    /// cluster tolerance form one group whose representative is the mean.
    pub fn detect(dec: &SymmetricDecomposition) -> Result<Self> {
        Self::build(&dec.eigenvalues, &dec.eigenvectors, |a, b| {
            (a - b).abs() <= CLUSTER_TOLERANCE * a.abs().max(1.0)
        })
    }

    fn build(values: &[f64], vectors: &DenseMatrix, same: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(invalid("spectrum is empty"));
        }
        if vectors.shape() != (n, n) {
            return Err(invalid(format!(
                "eigenvector matrix is {}x{} but spectrum has {n} values",
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite eigenvalue {bad}")));
        }

        // cluster along the value axis first, where members are adjacent
        let mut by_value: Vec<usize> = (0..n).collect();
        by_value.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut cluster_of = vec![0usize; n];
        let mut clusters: Vec<Vec<usize>> = vec![vec![by_value[0]]];
        for w in by_value.windows(2) {
            if !same(values[w[0]], values[w[1]]) {
                clusters.push(Vec::new());
            }
            clusters.last_mut().expect("non-empty").push(w[1]);
        }
        let means: Vec<f64> = clusters
            .iter()
            .map(|c| c.iter().map(|&i| values[i]).sum::<f64>() / c.len() as f64)
            .collect();
        for (ci, c) in clusters.iter().enumerate() {
            for &i in c {
                cluster_of[i] = ci;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            values[b]
                .abs()
                .total_cmp(&values[a].abs())
                .then(values[b].total_cmp(&values[a]))
        });
        let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let eigenvectors = DenseMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);

        // distinct values numbered by first appearance in magnitude order
        let mut renumber = vec![usize::MAX; clusters.len()];
        let mut distinct = Vec::new();
        let mut multiplicities = Vec::new();
        let mut group = Vec::with_capacity(n);
        for &i in &order {
            let c = cluster_of[i];
            if renumber[c] == usize::MAX {
                renumber[c] = distinct.len();
                distinct.push(means[c]);
                multiplicities.push(clusters[c].len());
            }
            group.push(renumber[c]);
        }

        let scale = eigenvalues[0].abs();
        let rank = eigenvalues
            .iter()
            .filter(|v| v.abs() > DEFAULT_RANK_TOLERANCE * scale)
            .count();
        Ok(SpectralProfile { eigenvalues, eigenvectors, distinct, multiplicities, group, rank })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// All `n` eigenvalues, largest magnitude first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors aligned with [`eigenvalues`](Self::eigenvalues);
    /// range eigenvectors first, then nullspace eigenvectors.
    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct
    }

    /// Multiplicity of each entry of [`distinct_values`](Self::distinct_values).
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Index into `distinct_values` for eigenvalue `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group[i]
    }

    /// Number of distinct eigenvalues.
    pub fn distinct_count(&self) -> usize {
        self.distinct.len()
    }

    /// Number of nonzero eigenvalues.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_all_simple(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Largest magnitude over eigenvalues with multiplicity above one.
    pub fn lambda_star(&self) -> Option<f64> {
        self.repeated().map(|(v, _)| v.abs()).reduce(f64::max)
    }

    /// `(value, multiplicity)` for each repeated eigenvalue.
    pub fn repeated(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.distinct
            .iter()
            .zip(&self.multiplicities)
            .filter(|(_, &m)| m > 1)
            .map(|(&v, &m)| (v, m))
    }

    pub fn largest_magnitude(&self) -> f64 {
        self.eigenvalues[0].abs()
    }

    /// Smallest magnitude among the nonzero eigenvalues, if any.
    pub fn smallest_nonzero_magnitude(&self) -> Option<f64> {
        self.eigenvalues[..self.rank].last().map(|v| v.abs())
    }

    /// Columns of the eigenvector matrix belonging to distinct value `d`.
    pub fn eigenspace(&self, d: usize) -> DenseMatrix {
        let cols: Vec<usize> = (0..self.dim()).filter(|&i| self.group[i] == d).collect();
        DenseMatrix::from_fn(self.dim(), cols.len(), |r, c| self.eigenvectors[(r, cols[c])])
    }

    /// Eigenvectors of the nonzero eigenvalues (`n x r`).
    pub fn range_eigenvectors(&self) -> DenseMatrix {
        self.eigenvectors.columns(0, self.rank).into_owned()
    }

    /// Eigenvectors spanning the nullspace (`n x (n - r)`).
    pub fn null_eigenvectors(&self) -> DenseMatrix {
        self.eigenvectors.columns(self.rank, self.dim() - self.rank).into_owned()
    }
}

/// A discrete-time system `x_{t+1} = A x_t`.
#[derive(Debug, Clone)]
pub struct LtiSystem {
    matrix: DenseMatrix,
    symmetric: bool,
    profile: Option<SpectralProfile>,
}

impl LtiSystem {
    /// Wraps a square matrix. A symmetric matrix gets a spectral profile
    /// from its computed eigendecomposition, with eigenvalue clustering.
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        ensure_finite(&matrix, "system matrix")?;
        if !matrix.is_square() || matrix.is_empty() {
            return Err(invalid(format!(
                "system matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let symmetric = is_symmetric(&matrix, SYMMETRY_TOLERANCE);
        let profile = if symmetric {
            Some(SpectralProfile::detect(&symmetric_eigendecomposition(&matrix)?)?)
        } else {
            None
        };
        Ok(LtiSystem { matrix, symmetric, profile })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn profile(&self) -> Option<&SpectralProfile> {
        self.profile.as_ref()
    }
}

/// Symmetric system `A = Q diag(spectrum) Q^T` with `Q` a seeded Haar
/// orthogonal matrix. The profile carries the requested spectrum verbatim.
pub fn synthesize_symmetric(spectrum: &[f64], seed: u64) -> Result<LtiSystem> {
    let n = spectrum.len();
    if n == 0 {
        return Err(invalid("spectrum must contain at least one eigenvalue"));
    }
    let q = random::random_orthogonal(n, &mut random::seeded(seed));
    let profile = SpectralProfile::from_exact(spectrum, &q)?;
    let lambda = DenseMatrix::from_diagonal(&Vector::from_column_slice(profile.eigenvalues()));
    let v = profile.eigenvectors();
    let a = v * lambda * v.transpose();
    let matrix = (&a + a.transpose()) * 0.5;
    Ok(LtiSystem { matrix, symmetric: true, profile: Some(profile) })
}

/// Discrete system `A = exp(-dt * G)` for the continuous dynamics
/// `xdot = -G x` (for a graph, `G` is the Laplacian).
pub fn discretize(generator: &DenseMatrix, dt: f64) -> Result<LtiSystem> {
    ensure_finite(generator, "generator")?;
    if !generator.is_square() || generator.is_empty() {
        return Err(invalid("generator must be square and non-empty"));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    let mut a = (generator * -dt).exp();
    if is_symmetric(generator, SYMMETRY_TOLERANCE) {
        a = (&a + a.transpose()) * 0.5;
    }
    LtiSystem::new(a)
}

/// Coordinates of `x0` in the eigenbasis: `x0 = Q nu + Qbar mu`.
#[derive(Debug, Clone)]
pub struct InitialCondition {
    pub x0: Vector,
    /// Coefficients on the eigenvectors of nonzero eigenvalues.
    pub nu: Vector,
    /// Coefficients on the nullspace eigenvectors.
    pub mu: Vector,
    pub nnz_nu: usize,
    pub nnz_mu: usize,
}

impl InitialCondition {
    /// `(nu, mu)` stacked, aligned with the profile's eigenvector columns.
    pub fn alpha(&self) -> Vector {
        let mut a = Vector::zeros(self.nu.len() + self.mu.len());
        a.rows_mut(0, self.nu.len()).copy_from(&self.nu);
        a.rows_mut(self.nu.len(), self.mu.len()).copy_from(&self.mu);
        a
    }

    /// Norm of the projection of `x0` onto each distinct eigenspace.
    pub fn eigenspace_weights(&self, profile: &SpectralProfile) -> Vec<f64> {
        let alpha = self.alpha();
        let mut w = vec![0.0; profile.distinct_count()];
        for (i, a) in alpha.iter().enumerate() {
            w[profile.group_of(i)] += a * a;
        }
        w.into_iter().map(f64::sqrt).collect()
    }

    /// True when `x0` has a nonzero component in every distinct eigenspace,
    /// which is what the rank law needs.
    pub fn is_generic(&self, profile: &SpectralProfile) -> bool {
        let floor = COEFFICIENT_TOLERANCE * self.x0.norm();
        self.eigenspace_weights(profile).iter().all(|&w| w > floor)
    }
}

pub fn decompose_initial_condition(profile: &SpectralProfile, x0: &Vector) -> Result<InitialCondition> {
    ensure_finite_vector(x0, "x0")?;
    if x0.len() != profile.dim() {
        return Err(invalid(format!("x0 has length {} but the system has dimension {}", x0.len(), profile.dim())));
    }
    let norm = x0.norm();
    if norm == 0.0 {
        return Err(invalid("x0 must be nonzero"));
    }
    let coeffs = profile.eigenvectors().transpose() * x0;
    let r = profile.rank();
    let nu = coeffs.rows(0, r).into_owned();
    let mu = coeffs.rows(r, profile.dim() - r).into_owned();
    let floor = COEFFICIENT_TOLERANCE * norm;
    let nnz = |v: &Vector| v.iter().filter(|c| c.abs() > floor).count();
    let (nnz_nu, nnz_mu) = (nnz(&nu), nnz(&mu));
    if nnz_nu == 0 {
        return Err(invalid("x0 is orthogonal to the range of A (nu = 0)"));
    }
    Ok(InitialCondition { x0: x0.clone(), nu, mu, nnz_nu, nnz_mu })
}

fn power_rows(values: &[f64], columns: usize) -> DenseMatrix {
    let mut v = DenseMatrix::zeros(values.len(), columns);
    for (i, &lambda) in values.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..columns {
            v[(i, j)] = p;
            p *= lambda;
        }
    }
    v
}

/// `[V]_{ij} = lambda_i^j` for `j = 0..columns`. The values must be
/// pairwise distinct under the cluster tolerance.
pub fn vandermonde(distinct: &[f64], columns: usize) -> Result<DenseMatrix> {
    if let Some(bad) = distinct.iter().find(|v| !v.is_finite()) {
        return Err(invalid(format!("non-finite node {bad}")));
    }
    let mut sorted = distinct.to_vec();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        if (w[1] - w[0]).abs() <= CLUSTER_TOLERANCE * w[0].abs().max(1.0) {
            return Err(invalid(format!("nodes {} and {} are not distinct", w[0], w[1])));
        }
    }
    Ok(power_rows(distinct, columns))
}

/// The snapshot matrix written as `X_k = Qtilde Gamma V`.
#[derive(Debug, Clone)]
pub struct StructuralFactors {
    /// Full orthonormal eigenbasis `[Q | Qbar]`.
    pub basis: DenseMatrix,
    /// `diag(alpha)`.
    pub gamma: DenseMatrix,
    /// `n x (k+1)` Vandermonde matrix on all `n` eigenvalues.
    pub vandermonde: DenseMatrix,
}

impl StructuralFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        &self.basis * &self.gamma * &self.vandermonde
    }
}

pub fn structural_factorization(profile: &SpectralProfile, ic: &InitialCondition, k: usize) -> Result<StructuralFactors> {
    if ic.x0.len() != profile.dim() {
        return Err(invalid("initial condition does not match the profile dimension"));
    }
    Ok(StructuralFactors {
        basis: profile.eigenvectors().clone(),
        gamma: DenseMatrix::from_diagonal(&ic.alpha()),
        vandermonde: power_rows(profile.eigenvalues(), k + 1),
    })
}
