//! Fitting a time series supplied as CSV, one state per row. There is no
//! ground truth, so the only diagnostics are the data rank and the fit
//! residual `||Y_k - A_k X_k||_F`.

use std::path::{Path, PathBuf};

use regcert_core::{DenseMatrix, RegressionState, Tolerance, Vector};

use crate::error::{CliError, Result};
use crate::output::{fmt_f64, write_matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub k: usize,
    pub observed_rank: usize,
    pub residual_frobenius: f64,
}

#[derive(Debug, Clone)]
pub struct ExternalFit {
    /// States as columns, in file order.
    pub states: DenseMatrix,
    pub model: DenseMatrix,
    pub records: Vec<FitRecord>,
}

/// Reads `T >= 2` rows of `n` finite numbers. Blank lines and lines
/// starting with `#` are skipped.
pub fn read_states(path: &Path) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))?;
    let parse_error = |line: u64, column: usize, message: String| CliError::Parse { path: path.to_path_buf(), line, column, message };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if record.len() != first.len() {
                return Err(parse_error(line, record.len(), format!("row has {} cells, expected {}", record.len(), first.len())));
            }
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| parse_error(line, c + 1, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_error(line, c + 1, format!("`{cell}` is not finite")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(parse_error(0, 0, format!("need at least two states, found {}", rows.len())));
    }
    let n = rows[0].len();
    Ok(DenseMatrix::from_fn(n, rows.len(), |i, t| rows[t][i]))
}

/// Fits the stream online, one transition at a time.
pub fn fit_states(states: &DenseMatrix, tolerance: Tolerance) -> Result<ExternalFit> {
    let col = |t: usize| -> Vector { states.column(t).into_owned() };
    let mut state = RegressionState::new(&col(0), &col(1), tolerance)?;
    let mut records = vec![record(&state)];
    for t in 2..states.ncols() {
        state.ingest_snapshot(&col(t))?;
        records.push(record(&state));
    }
    Ok(ExternalFit { states: states.clone(), model: state.estimate().clone(), records })
}

fn record(state: &RegressionState) -> FitRecord {
    let log = state.log();
    FitRecord {
        k: state.k(),
        observed_rank: state.rank(),
        residual_frobenius: (log.y() - state.estimate() * log.x()).norm(),
    }
}

pub fn fit_external(path: &Path, tolerance: Tolerance) -> Result<ExternalFit> {
    fit_states(&read_states(path)?, tolerance)
}

/// Writes `model.csv` and `fit_records.csv` into `dir`.
pub fn write_fit(fit: &ExternalFit, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let model = dir.join("model.csv");
    write_matrix(&fit.model, &model)?;
    let records = dir.join("fit_records.csv");
    let mut s = String::from("k,observed_rank,residual_frobenius\n");
    for r in &fit.records {
        s.push_str(&format!("{},{},{}\n", r.k, r.observed_rank, fmt_f64(r.residual_frobenius)));
    }
    std::fs::write(&records, s).map_err(|e| CliError::io(&records, e))?;
    Ok(vec![model, records])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data.csv");
        std::fs::write(&p, text).unwrap();
        (dir, p)
    }

    fn location(err: CliError) -> (u64, usize) {
        match err {
            CliError::Parse { line, column, .. } => (line, column),
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn two_rows_fit_rank_one() {
        let (_d, p) = write("1,2\n3,4\n");
        let fit = fit_external(&p, Tolerance::default()).unwrap();
        assert_eq!(fit.records, vec![FitRecord { k: 0, observed_rank: 1, residual_frobenius: fit.records[0].residual_frobenius }]);
        assert!(fit.records[0].residual_frobenius < 1e-14);
        let x = Vector::from_vec(vec![1.0, 2.0]);
        assert!((&fit.model * &x - Vector::from_vec(vec![3.0, 4.0])).norm() < 1e-14);
    }

    #[test]
    fn nan_cell_is_located() {
        let (_d, p) = write("1,2\n3,NaN\n5,6\n");
        assert_eq!(location(fit_external(&p, Tolerance::default()).unwrap_err()), (2, 2));
    }

    #[test]
    fn text_and_ragged_rows_are_located() {
        let (_d, p) = write("# comment\n1,2\n3,x\n");
        assert_eq!(location(fit_external(&p, Tolerance::default()).unwrap_err()), (3, 2));
        let (_d, p) = write("1,2\n3,4,5\n");
        assert_eq!(location(fit_external(&p, Tolerance::default()).unwrap_err()).0, 2);
        let (_d, p) = write("1,2\n");
        assert!(fit_external(&p, Tolerance::default()).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = fit_external(Path::new("/nonexistent/data.csv"), Tolerance::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
