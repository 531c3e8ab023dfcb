//! Spectral predictions for symmetric systems: the Frobenius bound before
//! saturation, the data rank law, the nullspace structure of saturated
//! data and the repeated-eigenvalue error floor.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement, svd, DenseMatrix, SvdFactors, Tolerance};
use crate::regression::{ErrorCertificate, RegressionState};
use crate::system::{InitialCondition, LtiSystem, SpectralProfile};

/// Why a prediction does not apply to a given system or step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inapplicable {
    NonSymmetric,
    AllSimple,
    RepeatedEigenvalues,
    FullData,
    BeforeSaturation,
    NonGeneric,
    RankMismatch,
}

impl fmt::Display for Inapplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inapplicable::NonSymmetric => "non-symmetric system",
            Inapplicable::AllSimple => "all eigenvalues simple",
            Inapplicable::RepeatedEigenvalues => "repeated eigenvalues",
            Inapplicable::FullData => "k >= n",
            Inapplicable::BeforeSaturation => "k < s",
            Inapplicable::NonGeneric => "initial condition misses an eigenspace",
            Inapplicable::RankMismatch => "rank(X_k) != s",
        })
    }
}

/// A prediction, or the hypothesis that rules it out.
pub type Outcome<T> = std::result::Result<T, Inapplicable>;

/// Squared Frobenius-error bound `(n - min{k, |nu| + min{|mu|, 1}}) a^2 - b^2`
/// under two readings of `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrobeniusBound {
    /// `a = max |lambda|`, `b` = smallest nonzero `|lambda|`. This is the
    /// reading that stays valid with negative eigenvalues.
    pub singular_value: f64,
    /// `a = lambda_max(A)`, `b = lambda_min(A)`, signed.
    pub literal: f64,
}

impl FrobeniusBound {
    /// Square root of the singular-value reading, comparable with
    /// `||A - A_k||_F`. Negative bounds clamp to zero.
    pub fn singular_value_sqrt(&self) -> f64 {
        self.singular_value.max(0.0).sqrt()
    }
}

pub fn frobenius_bound(profile: &SpectralProfile, ic: &InitialCondition, k: usize) -> Outcome<FrobeniusBound> {
    let n = profile.dim();
    if !profile.is_all_simple() {
        return Err(Inapplicable::RepeatedEigenvalues);
    }
    if k >= n {
        return Err(Inapplicable::FullData);
    }
    let coverage = k.min(ic.nnz_nu + ic.nnz_mu.min(1));
    let factor = (n - coverage) as f64;
    let sigma_max = profile.largest_magnitude();
    let sigma_min = profile.smallest_nonzero_magnitude().unwrap_or(0.0);
    let values = profile.eigenvalues();
    let lambda_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FrobeniusBound {
        singular_value: factor * sigma_max * sigma_max - sigma_min * sigma_min,
        literal: factor * lambda_max * lambda_max - lambda_min * lambda_min,
    })
}

/// Rank of `X_k` for a generic initial condition: `min(k + 1, s)`.
pub fn predicted_rank(profile: &SpectralProfile, k: usize) -> usize {
    (k + 1).min(profile.distinct_count())
}

/// One repeated eigenvalue and the part of the data nullspace inside its
/// eigenspace.
#[derive(Debug, Clone)]
pub struct PartitionBlock {
    pub value: f64,
    pub multiplicity: usize,
    /// Orthonormal eigenspace basis, `n x m`.
    pub eigenvectors: DenseMatrix,
    /// Orthonormal part of the data nullspace in this eigenspace, `n x (m - 1)`.
    pub nullspace: DenseMatrix,
    /// `nullspace^T eigenvectors`, `(m - 1) x m`.
    pub block: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct MultiplicityPartition {
    /// Number of repeated eigenvalues.
    pub ell: usize,
    pub blocks: Vec<PartitionBlock>,
    /// The `s` distinct eigenvalues in profile order.
    pub representatives: Vec<f64>,
    /// One unit eigenvector per distinct eigenvalue: the projection of `x0`
    /// onto that eigenspace, normalized.
    pub q1: DenseMatrix,
    /// Orthonormal basis of the orthogonal complement of `range(X_k)`.
    pub u2: DenseMatrix,
}

/// Partitions the nullspace of saturated data `X_k` (rank `s`) by
/// eigenspace.
///
/// Within a repeated eigenspace only the direction that `x0` excites is
/// seen by the data, so the representative eigenvector is taken along that
/// direction rather than as an arbitrary basis vector.
pub fn multiplicity_partition(profile: &SpectralProfile, ic: &InitialCondition, data: &SvdFactors) -> Result<MultiplicityPartition> {
    let n = profile.dim();
    let s = profile.distinct_count();
    if data.rows() != n || ic.x0.len() != n {
        return Err(Error::InvalidInput("profile, initial condition and data dimensions differ".into()));
    }
    if data.numeric_rank != s {
        return Err(Error::Precondition(format!("partition needs rank(X_k) = s = {s}, got {}", data.numeric_rank)));
    }
    if !ic.is_generic(profile) {
        return Err(Error::Precondition("initial condition misses an eigenspace".into()));
    }
    let u2 = orthogonal_complement(&data.u)?;
    let mut q1 = DenseMatrix::zeros(n, s);
    let mut blocks = Vec::new();
    for (d, (&value, &multiplicity)) in profile.distinct_values().iter().zip(profile.multiplicities()).enumerate() {
        let eigenvectors = profile.eigenspace(d);
        let projector = &eigenvectors * eigenvectors.transpose();
        let aligned = &projector * &ic.x0;
        q1.set_column(d, &(&aligned / aligned.norm()));
        if multiplicity == 1 {
            continue;
        }
        let inside = svd(&(&projector * &u2), Tolerance::Absolute(0.5))?;
        if inside.numeric_rank != multiplicity - 1 {
            return Err(Error::Numerical(format!(
                "eigenspace of {value} holds {} nullspace directions, expected {}",
                inside.numeric_rank,
                multiplicity - 1
            )));
        }
        let nullspace = inside.u;
        let block = nullspace.transpose() * &eigenvectors;
        blocks.push(PartitionBlock { value, multiplicity, eigenvectors, nullspace, block });
    }
    Ok(MultiplicityPartition { ell: blocks.len(), blocks, representatives: profile.distinct_values().to_vec(), q1, u2 })
}

/// `||U_2^T Q_1||_F`; zero when the data nullspace avoids every
/// representative eigenvector.
pub fn lemma3_residual(u2: &DenseMatrix, q1: &DenseMatrix) -> f64 {
    (u2.transpose() * q1).norm()
}

/// Error floor of saturated data (`k >= s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorFloor {
    /// `lambda* = max |lambda|` over repeated eigenvalues.
    pub spectral: f64,
    /// `sqrt(sum (m - 1) lambda^2)` over repeated eigenvalues.
    pub frobenius: f64,
}

pub fn repeated_eigenvalue_floor(profile: &SpectralProfile) -> Outcome<ErrorFloor> {
    let spectral = profile.lambda_star().ok_or(Inapplicable::AllSimple)?;
    let frobenius = profile
        .repeated()
        .map(|(v, m)| (m - 1) as f64 * v * v)
        .sum::<f64>()
        .sqrt();
    Ok(ErrorFloor { spectral, frobenius })
}

/// Every spectral prediction for one step, next to what was observed.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub k: usize,
    pub observed_rank: usize,
    pub predicted_rank: Outcome<usize>,
    pub thm2: Outcome<FrobeniusBound>,
    pub lambda_star: Option<f64>,
    pub thm4: Outcome<ErrorFloor>,
    pub lemma3_residual: Outcome<f64>,
}

/// Joins the predictions for the current step. `None` at `k = 0`, where no
/// certificate exists. `ic` is required for symmetric systems.
pub fn bound_report(
    truth: &LtiSystem,
    ic: Option<&InitialCondition>,
    state: &RegressionState,
    certificate: &ErrorCertificate,
) -> Result<Option<BoundReport>> {
    let k = state.k();
    if k == 0 {
        return Ok(None);
    }
    if certificate.k != k {
        return Err(Error::InvalidInput(format!("certificate is for step {} but the state is at {k}", certificate.k)));
    }
    let observed_rank = state.rank();
    let (profile, ic) = match (truth.profile(), ic) {
        (Some(p), Some(ic)) => (p, ic),
        (Some(_), None) => {
            return Err(Error::InvalidInput("symmetric systems need the decomposed initial condition".into()));
        }
        (None, _) => {
            let na = Inapplicable::NonSymmetric;
            return Ok(Some(BoundReport {
                k,
                observed_rank,
                predicted_rank: Err(na),
                thm2: Err(na),
                lambda_star: None,
                thm4: Err(na),
                lemma3_residual: Err(na),
            }));
        }
    };

    let generic = ic.is_generic(profile);
    let saturated = k + 1 > profile.distinct_count();
    let predicted = if generic { Ok(predicted_rank(profile, k)) } else { Err(Inapplicable::NonGeneric) };
    let thm4 = repeated_eigenvalue_floor(profile).and_then(|f| if saturated { Ok(f) } else { Err(Inapplicable::BeforeSaturation) });
    let lemma3 = if !saturated {
        Err(Inapplicable::BeforeSaturation)
    } else if !generic {
        Err(Inapplicable::NonGeneric)
    } else {
        match multiplicity_partition(profile, ic, state.svd_current()) {
            Ok(part) => Ok(lemma3_residual(&part.u2, &part.q1)),
            Err(Error::Precondition(_)) => Err(Inapplicable::RankMismatch),
            Err(e) => return Err(e),
        }
    };

    Ok(Some(BoundReport {
        k,
        observed_rank,
        predicted_rank: predicted,
        thm2: frobenius_bound(profile, ic, k),
        lambda_star: profile.lambda_star(),
        thm4,
        lemma3_residual: lemma3,
    }))
}
