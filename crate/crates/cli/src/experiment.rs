//! Simulate, fit online, certify and collect one record per step.

use regcert_core::random::{gaussian_unit_vector, seeded_stream, INITIAL_CONDITION_STREAM};
use regcert_core::{
    bound_report, decompose_initial_condition, discretize, error_certificate, simulate, synthesize_symmetric,
    weighted_petersen_laplacian, DenseMatrix, Inapplicable, InitialCondition, LtiSystem, Outcome, RegressionState,
    SnapshotLog, Tolerance, Vector,
};

use crate::config::{ExperimentConfig, InitialConditionSpec, NamedSystem, SystemSource};
use crate::error::{CliError, Result};

/// Everything measured and predicted at step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub observed_rank: usize,
    pub predicted_rank: Outcome<usize>,
    pub empirical_spectral: f64,
    pub empirical_frobenius: f64,
    pub degenerate: bool,
    /// `||I - S P / Tr(SP)||_2`; absent on degenerate steps.
    pub thm1_bound: Option<f64>,
    pub e_norm: Option<f64>,
    pub identity_residual: Option<f64>,
    /// Square root of the singular-value reading of the Frobenius bound.
    pub thm2_bound: Outcome<f64>,
    /// The signed reading, squared (it can be negative).
    pub thm2_literal: Outcome<f64>,
    pub thm4_spectral: Outcome<f64>,
    pub thm4_frobenius: Outcome<f64>,
    pub lemma3_residual: Outcome<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub system: LtiSystem,
    pub initial_condition: Option<InitialCondition>,
    pub log: SnapshotLog,
    pub estimate: DenseMatrix,
    pub records: Vec<StepRecord>,
}

impl RunOutput {
    pub fn x0(&self) -> Vector {
        self.log.state(0)
    }

    /// `x_0 .. x_{steps+1}` as columns.
    pub fn trajectory(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.log.dim(), self.log.k() + 2);
        t.columns_mut(0, self.log.k() + 1).copy_from(self.log.x());
        t.set_column(self.log.k() + 1, &self.log.last_state());
        t
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

pub fn build_system(cfg: &ExperimentConfig) -> Result<LtiSystem> {
    let sys = match &cfg.system {
        SystemSource::Matrix { rows } => LtiSystem::new(matrix_from_rows(rows)),
        SystemSource::Spectrum { values } => synthesize_symmetric(values, cfg.seed),
        SystemSource::Named { name: NamedSystem::PetersenWeighted, dt } => discretize(&weighted_petersen_laplacian(), *dt),
        SystemSource::Generator { rows, dt } => discretize(&matrix_from_rows(rows), *dt),
    };
    sys.map_err(|e| CliError::config("system", e.to_string()))
}

pub fn build_initial_condition(cfg: &ExperimentConfig, system: &LtiSystem) -> Result<Vector> {
    let n = system.dim();
    match &cfg.initial_condition {
        InitialConditionSpec::Vector { values } => {
            if values.len() != n {
                return Err(CliError::config(
                    "initial_condition.values",
                    format!("has {} entries but the system has dimension {n}", values.len()),
                ));
            }
            Ok(Vector::from_column_slice(values))
        }
        InitialConditionSpec::Gaussian { orthogonal_to_modes } => {
            let mut x0 = gaussian_unit_vector(n, &mut seeded_stream(cfg.seed, INITIAL_CONDITION_STREAM));
            if orthogonal_to_modes.is_empty() {
                return Ok(x0);
            }
            let field = "initial_condition.orthogonal_to_modes";
            let profile = system
                .profile()
                .ok_or_else(|| CliError::config(field, "needs a symmetric system"))?;
            for &i in orthogonal_to_modes {
                if i >= n {
                    return Err(CliError::config(field, format!("mode {i} is out of range for dimension {n}")));
                }
                let q = profile.eigenvectors().column(i);
                let c = q.dot(&x0);
                x0 -= q * c;
            }
            let norm = x0.norm();
            if norm == 0.0 {
                return Err(CliError::config(field, "projecting out every mode leaves x0 = 0"));
            }
            Ok(x0 / norm)
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let system = build_system(cfg)?;
    let x0 = build_initial_condition(cfg, &system)?;
    let ic = match system.profile() {
        Some(p) => Some(decompose_initial_condition(p, &x0).map_err(|e| CliError::config("initial_condition", e.to_string()))?),
        None => None,
    };
    let log = simulate(&system, &x0, cfg.steps)?;
    let mut state = RegressionState::new(&log.state(0), &log.state(1), Tolerance::Relative(cfg.rank_tolerance))?;
    let mut records = Vec::with_capacity(cfg.steps);
    for k in 1..=cfg.steps {
        state.ingest_snapshot(&log.state(k + 1))?;
        let cert = error_certificate(&state, &system)?;
        let report = bound_report(&system, ic.as_ref(), &state, &cert)?.expect("k >= 1 has a report");
        records.push(StepRecord {
            k,
            observed_rank: report.observed_rank,
            predicted_rank: report.predicted_rank,
            empirical_spectral: cert.empirical_spectral,
            empirical_frobenius: cert.empirical_frobenius,
            degenerate: cert.degenerate,
            thm1_bound: cert.thm1_bound,
            e_norm: cert.e_norm,
            identity_residual: cert.identity_residual,
            thm2_bound: report.thm2.map(|b| b.singular_value_sqrt()),
            thm2_literal: report.thm2.map(|b| b.literal),
            thm4_spectral: report.thm4.map(|f| f.spectral),
            thm4_frobenius: report.thm4.map(|f| f.frobenius),
            lemma3_residual: report.lemma3_residual,
        });
    }
    Ok(RunOutput {
        config: cfg.clone(),
        estimate: state.estimate().clone(),
        system,
        initial_condition: ic,
        log,
        records,
    })
}

/// Reason shared by every record for an absent field, if it is absent
/// everywhere.
pub fn common_reason<T>(records: &[StepRecord], field: impl Fn(&StepRecord) -> &Outcome<T>) -> Option<Inapplicable> {
    let mut reasons = records.iter().map(|r| field(r).as_ref().err().copied());
    let first = reasons.next()??;
    reasons.all(|r| r == Some(first)).then_some(first)
}
