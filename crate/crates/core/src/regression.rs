//! Least-squares model regression `A_k = Y_k X_k^+` and the error operator
//! that relates each estimate to the true dynamics.

use crate::error::{invalid, Error, Result};
use crate::linalg::{spectral_norm, svd, DenseMatrix, SvdFactors, Tolerance, Vector};
use crate::snapshots::SnapshotLog;
use crate::system::{InitialCondition, LtiSystem};

/// A step is degenerate when `Tr(S_k P_k) <= DEGENERACY_TOLERANCE * ||x_k||^2`,
/// i.e. `x_k` is numerically inside the span of the earlier snapshots.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// `Y_k X_k^+` with the pseudo-inverse truncated at `tol`.
pub fn fit_batch(log: &SnapshotLog, tol: Tolerance) -> Result<DenseMatrix> {
    Ok(log.y() * svd(log.x(), tol)?.pseudo_inverse())
}

/// Online regression: the snapshot log, the current estimate and the SVD
/// factors the certificate needs.
#[derive(Debug, Clone)]
pub struct RegressionState {
    log: SnapshotLog,
    tolerance: Tolerance,
    svd_prev: Option<SvdFactors>,
    svd_current: SvdFactors,
    estimate: DenseMatrix,
    rank_history: Vec<usize>,
}

impl RegressionState {
    /// Starts from `X_0 = [x0]`, `Y_0 = [x1]`.
    pub fn new(x0: &Vector, x1: &Vector, tolerance: Tolerance) -> Result<Self> {
        tolerance.validate()?;
        let log = SnapshotLog::new(x0, x1)?;
        let svd_current = svd(log.x(), tolerance)?;
        let estimate = log.y() * svd_current.pseudo_inverse();
        let rank_history = vec![svd_current.numeric_rank];
        Ok(RegressionState { log, tolerance, svd_prev: None, svd_current, estimate, rank_history })
    }

    /// Replays a whole log one snapshot at a time, so the rank history and
    /// cached factors match what online ingestion would have produced.
    pub fn from_log(log: &SnapshotLog, tolerance: Tolerance) -> Result<Self> {
        let mut state = Self::new(&log.state(0), &log.state(1), tolerance)?;
        for t in 2..=log.k() + 1 {
            state.ingest_snapshot(&log.state(t))?;
        }
        Ok(state)
    }

    /// Appends `x_{k+2}`: `X` gains `x_{k+1}`, `Y` gains the new snapshot.
    pub fn ingest_snapshot(&mut self, x_next: &Vector) -> Result<()> {
        self.log.push(x_next)?;
        let fresh = svd(self.log.x(), self.tolerance)?;
        self.estimate = self.log.y() * fresh.pseudo_inverse();
        self.rank_history.push(fresh.numeric_rank);
        self.svd_prev = Some(std::mem::replace(&mut self.svd_current, fresh));
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.log.k()
    }

    pub fn log(&self) -> &SnapshotLog {
        &self.log
    }

    pub fn estimate(&self) -> &DenseMatrix {
        &self.estimate
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tolerance
    }

    /// Numeric rank of `X_k`.
    pub fn rank(&self) -> usize {
        self.svd_current.numeric_rank
    }

    /// `rank_history()[j]` is the numeric rank of `X_j`.
    pub fn rank_history(&self) -> &[usize] {
        &self.rank_history
    }

    /// Truncated SVD of `X_k`.
    pub fn svd_current(&self) -> &SvdFactors {
        &self.svd_current
    }

    /// Truncated SVD of `X_{k-1}`; absent at step 0.
    pub fn svd_prev(&self) -> Option<&SvdFactors> {
        self.svd_prev.as_ref()
    }

    fn complement_prev(&self) -> Result<&SvdFactors> {
        self.svd_prev
            .as_ref()
            .ok_or_else(|| Error::Precondition("certificates need k >= 1 so that X_{k-1} exists".into()))
    }
}

#[derive(Debug, Clone)]
pub struct ErrorCertificate {
    pub k: usize,
    /// `S_k = I - U_{k-1} U_{k-1}^T`.
    pub s: DenseMatrix,
    /// `P_k = x_k x_k^T`.
    pub p: DenseMatrix,
    pub trace_sp: f64,
    pub degenerate: bool,
    /// `E_k`, absent on degenerate steps.
    pub e: Option<DenseMatrix>,
    pub e_norm: Option<f64>,
    /// `||I - S_k P_k / Tr(S_k P_k)||_2`.
    pub thm1_bound: Option<f64>,
    /// `A - A_k`, which equals `A E_k` on non-degenerate steps.
    pub absolute_error: DenseMatrix,
    /// `||A (I - E_k) - A_k||_F`.
    pub identity_residual: Option<f64>,
    pub empirical_spectral: f64,
    pub empirical_frobenius: f64,
}

/// `S - z z^T / ||z||^2` with `z = S w`, or `None` when `||S w||^2` is at
/// most `DEGENERACY_TOLERANCE * ||w||^2`.
///
/// Algebraically this is `(I - S w w^T / (w^T S w)) S`. Projecting `z` a
/// second time keeps the result a projector to working precision; the
/// literal product loses digits when `S w` is small.
fn deflated_projector(s: &DenseMatrix, w: &Vector) -> Option<DenseMatrix> {
    let z = s * w;
    if z.norm_squared() <= DEGENERACY_TOLERANCE * w.norm_squared() {
        return None;
    }
    let z = s * z;
    let z = &z / z.norm();
    Some(s - &z * z.transpose())
}

/// Error certificate for the current step `k >= 1`.
pub fn error_certificate(state: &RegressionState, truth: &LtiSystem) -> Result<ErrorCertificate> {
    let prev = state.complement_prev()?;
    let a = truth.matrix();
    let n = state.log.dim();
    if a.nrows() != n {
        return Err(invalid(format!("system has dimension {} but the data has dimension {n}", a.nrows())));
    }
    let k = state.k();
    let x_k = state.log.state(k);
    let s = prev.complement_projector();
    let p = &x_k * x_k.transpose();
    let sp = &s * &p;
    let trace_sp = sp.trace();
    let degenerate = trace_sp <= DEGENERACY_TOLERANCE * x_k.norm_squared();

    let absolute_error = a - &state.estimate;
    let empirical_spectral = spectral_norm(&absolute_error)?;
    let empirical_frobenius = absolute_error.norm();

    let (e, e_norm, thm1_bound, identity_residual) = match (degenerate, deflated_projector(&s, &x_k)) {
        (false, Some(e)) => {
            let bound_matrix = DenseMatrix::identity(n, n) - &sp / trace_sp;
            let thm1_bound = spectral_norm(&bound_matrix)?;
            let e_norm = spectral_norm(&e)?;
            let residual = (a * (DenseMatrix::identity(n, n) - &e) - &state.estimate).norm();
            (Some(e), Some(e_norm), Some(thm1_bound), Some(residual))
        }
        _ => (None, None, None, None),
    };

    Ok(ErrorCertificate {
        k,
        s,
        p,
        trace_sp,
        degenerate: degenerate || e.is_none(),
        e,
        e_norm,
        thm1_bound,
        absolute_error,
        identity_residual,
        empirical_spectral,
        empirical_frobenius,
    })
}

/// Output of [`lemma1_difference`].
#[derive(Debug, Clone)]
pub struct ModalDifference {
    pub difference: DenseMatrix,
    /// `||S_k w||` fell below the degeneracy tolerance. The difference is
    /// then `A S_k`: the newest snapshot adds no direction, so the estimate
    /// is `A` restricted to the span of the earlier data.
    pub degenerate: bool,
}

/// `A - A_k` from spectral data alone:
/// `A (I - S_k w w^T / ||S_k w||^2) S_k` with `w = Q Lambda^k nu`.
pub fn lemma1_difference(truth: &LtiSystem, ic: &InitialCondition, state: &RegressionState) -> Result<ModalDifference> {
    let profile = truth
        .profile()
        .ok_or_else(|| Error::Precondition("the modal form needs a symmetric system".into()))?;
    if ic.x0.len() != state.log.dim() || profile.dim() != state.log.dim() {
        return Err(invalid("initial condition, system and data dimensions differ"));
    }
    let prev = state.complement_prev()?;
    let k = state.k() as i32;
    let powers = Vector::from_iterator(
        profile.rank(),
        profile.eigenvalues()[..profile.rank()].iter().zip(ic.nu.iter()).map(|(l, nu)| l.powi(k) * nu),
    );
    let w = profile.range_eigenvectors() * powers;
    let s = prev.complement_projector();
    Ok(match deflated_projector(&s, &w) {
        Some(d) => ModalDifference { difference: truth.matrix() * d, degenerate: false },
        None => ModalDifference { difference: truth.matrix() * s, degenerate: true },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::snapshots::simulate;
    use crate::system::{decompose_initial_condition, synthesize_symmetric};
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> LtiSystem {
        LtiSystem::new(DenseMatrix::from_diagonal(&Vector::from_column_slice(v))).unwrap()
    }

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn state_for(sys: &LtiSystem, x0: &Vector, k: usize) -> RegressionState {
        RegressionState::from_log(&simulate(sys, x0, k).unwrap(), Tolerance::default()).unwrap()
    }

    #[test]
    fn full_rank_data_recovers_diagonal() {
        let sys = diag(&[1.0, 2.0]);
        let log = simulate(&sys, &v(&[1.0, 1.0]), 1).unwrap();
        assert_abs_diff_eq!(fit_batch(&log, Tolerance::default()).unwrap(), *sys.matrix(), epsilon = 1e-14);
    }

    #[test]
    fn rank_one_stream_projects_scalar_matrix() {
        let sys = diag(&[2.0, 2.0]);
        let expected = DenseMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        for k in 1..4 {
            let st = state_for(&sys, &v(&[1.0, 0.0]), k);
            assert_abs_diff_eq!(*st.estimate(), expected, epsilon = 1e-14);
            let cert = error_certificate(&st, &sys).unwrap();
            assert_abs_diff_eq!(cert.empirical_spectral, 2.0, epsilon = 1e-14);
            assert!(cert.degenerate);
            assert!(cert.e.is_none() && cert.thm1_bound.is_none());
        }
    }

    #[test]
    fn hand_evaluated_certificate() {
        let sys = diag(&[1.0, 2.0]);
        let st = state_for(&sys, &v(&[1.0, 1.0]), 1);
        let cert = error_certificate(&st, &sys).unwrap();
        assert_abs_diff_eq!(cert.s, DenseMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]), epsilon = 1e-15);
        assert_abs_diff_eq!(cert.trace_sp, 0.5, epsilon = 1e-12);
        assert!(!cert.degenerate);
        assert_abs_diff_eq!(cert.e.unwrap(), DenseMatrix::zeros(2, 2), epsilon = 1e-15);
        assert_abs_diff_eq!(cert.thm1_bound.unwrap(), 10f64.sqrt(), epsilon = 1e-14);
        assert!(cert.identity_residual.unwrap() < 1e-14);
    }

    #[test]
    fn certificate_needs_a_previous_step() {
        let sys = diag(&[1.0, 2.0]);
        let st = RegressionState::new(&v(&[1.0, 1.0]), &v(&[1.0, 2.0]), Tolerance::default()).unwrap();
        assert!(matches!(error_certificate(&st, &sys), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_holds_for_random_dynamics() {
        let mut rng = random::seeded(6);
        let a = random::gaussian_matrix(6, 6, &mut rng) / 6f64.sqrt();
        let sys = LtiSystem::new(a).unwrap();
        let x0 = random::gaussian_unit_vector(6, &mut rng);
        let scale = sys.matrix().norm();
        for k in 1..=5 {
            let st = state_for(&sys, &x0, k);
            let cert = error_certificate(&st, &sys).unwrap();
            assert!(!cert.degenerate);
            assert!(cert.identity_residual.unwrap() <= 1e-8 * scale, "k={k}");
            assert!(cert.e_norm.unwrap() <= cert.thm1_bound.unwrap() + 1e-9);
            assert_abs_diff_eq!(spectral_norm(&cert.s).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn online_matches_batch() {
        let mut rng = random::seeded(8);
        let sys = LtiSystem::new(random::gaussian_matrix(4, 4, &mut rng) / 2.0).unwrap();
        let log = simulate(&sys, &random::gaussian_unit_vector(4, &mut rng), 3).unwrap();
        let st = RegressionState::from_log(&log, Tolerance::default()).unwrap();
        assert_eq!(st.estimate(), &fit_batch(&log, Tolerance::default()).unwrap());
        assert_eq!(st.rank_history(), &[1, 2, 3, 4]);
        assert_abs_diff_eq!(*st.estimate(), *sys.matrix(), epsilon = 1e-8 * sys.matrix().norm());
    }

    #[test]
    fn dependent_snapshot_changes_nothing() {
        let sys = diag(&[2.0, 2.0, 3.0]);
        let mut st = state_for(&sys, &v(&[1.0, 1.0, 0.0]), 1);
        let before = st.estimate().clone();
        let rank = st.rank();
        let next = sys.matrix() * st.log().last_state();
        st.ingest_snapshot(&next).unwrap();
        assert_eq!(st.rank(), rank);
        assert_abs_diff_eq!(*st.estimate(), before, epsilon = 1e-9);
        assert!(st.ingest_snapshot(&v(&[1.0])).is_err());
    }

    #[test]
    fn fresh_direction_increments_rank() {
        let mut st = RegressionState::new(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0]), Tolerance::default()).unwrap();
        st.ingest_snapshot(&v(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(st.rank_history(), &[1, 2]);
    }

    #[test]
    fn modal_form_matches_direct_difference() {
        let sys = diag(&[1.0, 2.0]);
        let p = sys.profile().unwrap();
        let ic = decompose_initial_condition(p, &v(&[1.0, 1.0])).unwrap();
        let st = state_for(&sys, &ic.x0, 1);
        assert_abs_diff_eq!(lemma1_difference(&sys, &ic, &st).unwrap().difference, DenseMatrix::zeros(2, 2), epsilon = 1e-14);

        let sys = synthesize_symmetric(&[1.3, -0.9, 0.7, 0.4, -0.2], 5).unwrap();
        let ic = decompose_initial_condition(sys.profile().unwrap(), &random::gaussian_unit_vector(5, &mut random::seeded(1))).unwrap();
        let st = state_for(&sys, &ic.x0, 2);
        let direct = sys.matrix() - st.estimate();
        assert_abs_diff_eq!(lemma1_difference(&sys, &ic, &st).unwrap().difference, direct, epsilon = 1e-8);
    }

    #[test]
    fn modal_form_for_eigenvector_stream() {
        let sys = synthesize_symmetric(&[3.0, 1.0, 0.5], 2).unwrap();
        let p = sys.profile().unwrap();
        let q = p.eigenvectors().column(1).into_owned();
        let ic = decompose_initial_condition(p, &q).unwrap();
        let st = state_for(&sys, &q, 2);
        let rank_one = &q * q.transpose();
        assert_abs_diff_eq!(*st.estimate(), &rank_one * 1.0, epsilon = 1e-12);
        // every later snapshot is parallel to q, so the modal form is degenerate
        let modal = lemma1_difference(&sys, &ic, &st).unwrap();
        assert!(modal.degenerate);
        assert_abs_diff_eq!(modal.difference, sys.matrix() - rank_one, epsilon = 1e-12);
    }
}
