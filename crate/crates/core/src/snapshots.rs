//! Snapshot pairs `X_k = [x_0 .. x_k]`, `Y_k = [x_1 .. x_{k+1}]`.

use crate::error::{invalid, Result};
use crate::linalg::{ensure_finite, ensure_finite_vector, DenseMatrix, Vector};
use crate::system::LtiSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotLog {
    x: DenseMatrix,
    y: DenseMatrix,
}

impl SnapshotLog {
    /// The log at step 0: `X_0 = [x0]`, `Y_0 = [x1]`.
    pub fn new(x0: &Vector, x1: &Vector) -> Result<Self> {
        ensure_finite_vector(x0, "x0")?;
        ensure_finite_vector(x1, "x1")?;
        if x0.is_empty() || x0.len() != x1.len() {
            return Err(invalid(format!("snapshot lengths {} and {} do not match", x0.len(), x1.len())));
        }
        Ok(SnapshotLog { x: DenseMatrix::from_columns(std::slice::from_ref(x0)), y: DenseMatrix::from_columns(std::slice::from_ref(x1)) })
    }

    /// Builds the log from consecutive states `x_0 .. x_{k+1}` stored as
    /// columns; at least two columns are needed.
    pub fn from_states(states: &DenseMatrix) -> Result<Self> {
        ensure_finite(states, "state sequence")?;
        let (n, t) = states.shape();
        if n == 0 || t < 2 {
            return Err(invalid(format!("need at least two states of positive dimension, got {n}x{t}")));
        }
        Ok(SnapshotLog { x: states.columns(0, t - 1).into_owned(), y: states.columns(1, t - 1).into_owned() })
    }

    /// Latest step index `k`.
    pub fn k(&self) -> usize {
        self.x.ncols() - 1
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn y(&self) -> &DenseMatrix {
        &self.y
    }

    /// State `x_t` for `t <= k + 1`.
    pub fn state(&self, t: usize) -> Vector {
        if t <= self.k() {
            self.x.column(t).into_owned()
        } else {
            assert_eq!(t, self.k() + 1, "state {t} is beyond the log");
            self.y.column(self.k()).into_owned()
        }
    }

    /// Most recent state `x_{k+1}`.
    pub fn last_state(&self) -> Vector {
        self.y.column(self.k()).into_owned()
    }

    /// Appends `x_{k+2}`, advancing the log to step `k + 1`.
    pub fn push(&mut self, x_next: &Vector) -> Result<()> {
        ensure_finite_vector(x_next, "snapshot")?;
        if x_next.len() != self.dim() {
            return Err(invalid(format!("snapshot has length {} but the log has dimension {}", x_next.len(), self.dim())));
        }
        let last = self.last_state();
        let cols = self.x.ncols();
        self.x = std::mem::take(&mut self.x).insert_column(cols, 0.0);
        self.x.set_column(cols, &last);
        self.y = std::mem::take(&mut self.y).insert_column(cols, 0.0);
        self.y.set_column(cols, x_next);
        Ok(())
    }

    /// The log truncated to step `j <= k`.
    pub fn prefix(&self, j: usize) -> SnapshotLog {
        assert!(j <= self.k(), "prefix step {j} beyond k = {}", self.k());
        SnapshotLog { x: self.x.columns(0, j + 1).into_owned(), y: self.y.columns(0, j + 1).into_owned() }
    }
}

/// Runs `x_{t+1} = A x_t` and returns the log at step `k = steps`, so `X`
/// holds `x_0 .. x_steps` and `Y` holds `x_1 .. x_{steps+1}`.
pub fn simulate(system: &LtiSystem, x0: &Vector, steps: usize) -> Result<SnapshotLog> {
    ensure_finite_vector(x0, "x0")?;
    if x0.len() != system.dim() {
        return Err(invalid(format!("x0 has length {} but the system has dimension {}", x0.len(), system.dim())));
    }
    if x0.iter().all(|&v| v == 0.0) {
        return Err(invalid("x0 must be nonzero"));
    }
    if steps == 0 {
        return Err(invalid("steps must be at least 1"));
    }
    let a = system.matrix();
    let mut states = DenseMatrix::zeros(system.dim(), steps + 2);
    states.set_column(0, x0);
    for t in 0..=steps {
        let next = a * states.column(t);
        states.set_column(t + 1, &next);
    }
    SnapshotLog::from_states(&states)
}
