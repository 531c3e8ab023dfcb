//! Files written by a run: step records, matrices, the text report and a
//! matplotlib script.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use regcert_core::{DenseMatrix, Outcome};

use crate::config::Norm;
use crate::error::{CliError, Result};
use crate::experiment::{common_reason, RunOutput, StepRecord};

pub const RECORDS_HEADER: [&str; 11] = [
    "k",
    "observed_rank",
    "predicted_rank",
    "err_spectral",
    "err_frobenius",
    "thm1_bound",
    "thm2_bound",
    "thm4_spectral",
    "thm4_frobenius",
    "degenerate",
    "lemma3_residual",
];

/// Shortest round-tripping scientific form, so a written value parses back
/// to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn outcome<T: Copy>(v: &Outcome<T>, f: impl Fn(T) -> String) -> String {
    v.as_ref().map(|x| f(*x)).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let kind = e.kind();
    let source = match kind {
        csv::ErrorKind::Io(io) => std::io::Error::new(io.kind(), io.to_string()),
        _ => std::io::Error::other(e.to_string()),
    };
    CliError::io(path, source)
}

pub fn write_records_csv(records: &[StepRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(RECORDS_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        let row = [
            r.k.to_string(),
            r.observed_rank.to_string(),
            outcome(&r.predicted_rank, |v| v.to_string()),
            fmt_f64(r.empirical_spectral),
            fmt_f64(r.empirical_frobenius),
            opt(r.thm1_bound),
            outcome(&r.thm2_bound, fmt_f64),
            outcome(&r.thm4_spectral, fmt_f64),
            outcome(&r.thm4_frobenius, fmt_f64),
            r.degenerate.to_string(),
            outcome(&r.lemma3_residual, fmt_f64),
        ];
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `# rows cols` then one comma-separated row per line.
pub fn matrix_to_string(m: &DenseMatrix) -> String {
    let mut s = format!("# {} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_matrix(m: &DenseMatrix, path: &Path) -> Result<()> {
    fs::write(path, matrix_to_string(m)).map_err(|e| CliError::io(path, e))
}

/// States as rows, no header: the input format of `fit`.
pub fn write_trajectory(states: &DenseMatrix, path: &Path) -> Result<()> {
    let mut s = String::new();
    for col in states.column_iter() {
        let cells: Vec<String> = col.iter().map(|&v| fmt_f64(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable(String),
}

/// Outcome of one family of checks over all steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        match &self.status {
            Status::Pass => format!("{}: PASS ({})", self.name, self.detail),
            Status::Fail => format!("{}: FAIL ({})", self.name, self.detail),
            Status::NotApplicable(why) => format!("{}: N/A ({why})", self.name),
        }
    }
}

fn verdict(name: &'static str, ok: bool, detail: String) -> Check {
    Check { name, status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn na(name: &'static str, why: impl ToString) -> Check {
    Check { name, status: Status::NotApplicable(why.to_string()), detail: String::new() }
}

/// Re-checks every present prediction against the measured errors.
pub fn evaluate(out: &RunOutput) -> Vec<Check> {
    let records = &out.records;
    let scale = out.system.matrix().norm();
    let mut checks = Vec::new();

    let active: Vec<&StepRecord> = records.iter().filter(|r| !r.degenerate).collect();
    if active.is_empty() {
        checks.push(na("thm1", "every step degenerate"));
    } else {
        let worst_residual = active.iter().filter_map(|r| r.identity_residual).fold(0.0, f64::max);
        let slack = active
            .iter()
            .map(|r| r.e_norm.unwrap_or(0.0) - r.thm1_bound.unwrap_or(f64::INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = worst_residual <= 1e-8 * scale && slack <= 1e-9;
        let degenerate = records.len() - active.len();
        checks.push(verdict(
            "thm1",
            ok,
            format!(
                "{} certified steps, {degenerate} degenerate; max identity residual {:.3e} (limit {:.3e}); max ||E_k||_2 - bound {:.3e}",
                active.len(),
                worst_residual,
                1e-8 * scale,
                slack
            ),
        ));
    }

    let thm2: Vec<(usize, f64, f64)> = records
        .iter()
        .filter_map(|r| r.thm2_bound.ok().map(|b| (r.k, r.empirical_frobenius.powi(2), b * b)))
        .collect();
    if thm2.is_empty() {
        checks.push(na("thm2", common_reason(records, |r| &r.thm2_bound).map_or("no applicable step".into(), |w| w.to_string())));
    } else {
        let worst = thm2.iter().map(|(_, e, b)| e - b).fold(f64::NEG_INFINITY, f64::max);
        checks.push(verdict(
            "thm2",
            worst <= 1e-9,
            format!("singular-value reading, {} steps; max ||A - A_k||_F^2 - bound {:.3e}", thm2.len(), worst),
        ));
    }

    let ranks: Vec<(usize, usize)> = records.iter().filter_map(|r| r.predicted_rank.ok().map(|p| (r.observed_rank, p))).collect();
    if ranks.is_empty() {
        checks.push(na("thm3", common_reason(records, |r| &r.predicted_rank).map_or("no applicable step".into(), |w| w.to_string())));
    } else {
        let mismatches = ranks.iter().filter(|(o, p)| o != p).count();
        checks.push(verdict("thm3", mismatches == 0, format!("observed = min(k+1, s) at {}/{} steps", ranks.len() - mismatches, ranks.len())));
    }

    let floors: Vec<(&StepRecord, f64, f64)> = records
        .iter()
        .filter_map(|r| match (r.thm4_spectral, r.thm4_frobenius) {
            (Ok(s), Ok(f)) => Some((r, s, f)),
            _ => None,
        })
        .collect();
    match floors.last() {
        None => {
            let why = records.last().and_then(|r| r.thm4_spectral.err()).map_or("no applicable step".into(), |w| w.to_string());
            checks.push(na("thm4", why));
        }
        Some(&(last, lambda, fro)) => {
            let ok = floors.iter().all(|(r, s, f)| {
                (r.empirical_spectral - s).abs() <= 1e-8 * s && (r.empirical_frobenius.powi(2) - f * f).abs() <= 1e-7
            });
            checks.push(verdict(
                "thm4",
                ok,
                format!(
                    "{} steps with k >= s; at k = {}: spectral {:.9e} vs lambda* {:.9e}, frobenius {:.9e} vs {:.9e}",
                    floors.len(),
                    last.k,
                    last.empirical_spectral,
                    lambda,
                    last.empirical_frobenius,
                    fro
                ),
            ));
        }
    }

    let residuals: Vec<f64> = records.iter().filter_map(|r| r.lemma3_residual.ok()).collect();
    if residuals.is_empty() {
        let why = records.last().and_then(|r| r.lemma3_residual.err()).map_or("no applicable step".into(), |w| w.to_string());
        checks.push(na("lemma3", why));
    } else {
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        checks.push(verdict("lemma3", worst <= 1e-9, format!("{} steps; max ||U2^T Q1||_F {:.3e}", residuals.len(), worst)));
    }

    let n = out.system.dim();
    match records.iter().position(|r| r.observed_rank == n) {
        None => checks.push(na("recovery", "rank(X_k) < n at every step")),
        Some(first) => {
            let worst = records[first..].iter().map(|r| r.empirical_frobenius).fold(0.0, f64::max);
            checks.push(verdict(
                "recovery",
                worst <= 1e-8 * scale,
                format!("full rank from k = {}; max ||A - A_k||_F {:.3e} (limit {:.3e})", records[first].k, worst, 1e-8 * scale),
            ));
        }
    }
    checks
}

fn describe_system(out: &RunOutput) -> String {
    use crate::config::SystemSource;
    let cfg = &out.config;
    let source = match &cfg.system {
        SystemSource::Matrix { .. } => "explicit matrix".to_string(),
        SystemSource::Spectrum { values } => format!("symmetric with spectrum {values:?}"),
        SystemSource::Named { name, dt } => format!("{} (dt = {dt})", serde_json::to_string(name).unwrap().trim_matches('"')),
        SystemSource::Generator { dt, .. } => format!("exp(-dt G) (dt = {dt})"),
    };
    let shape = if out.system.is_symmetric() { "symmetric" } else { "non-symmetric" };
    format!("{source}; n = {}, {shape}", out.system.dim())
}

pub fn report(out: &RunOutput) -> String {
    let cfg = &out.config;
    let mut s = String::new();
    writeln!(s, "regcert report").unwrap();
    writeln!(s, "seed: {}", cfg.seed).unwrap();
    writeln!(s, "system: {}", describe_system(out)).unwrap();
    if let Some(p) = out.system.profile() {
        let repeated: Vec<String> = p.repeated().map(|(v, m)| format!("{v} (x{m})")).collect();
        let repeated = if repeated.is_empty() { "none".to_string() } else { repeated.join(", ") };
        writeln!(s, "distinct eigenvalues: {}; repeated: {repeated}", p.distinct_count()).unwrap();
    }
    if let Some(ic) = &out.initial_condition {
        writeln!(s, "initial condition: |nu| = {}, |mu| = {}", ic.nnz_nu, ic.nnz_mu).unwrap();
    }
    writeln!(s, "steps: {}; rank tolerance: {:e} (relative)", cfg.steps, cfg.rank_tolerance).unwrap();
    writeln!(s).unwrap();
    for c in evaluate(out) {
        writeln!(s, "{}", c.line()).unwrap();
    }
    writeln!(s).unwrap();

    let mut head = vec!["k", "rank", "pred"];
    for norm in &cfg.norms {
        head.push(match norm {
            Norm::Spectral => "err_2",
            Norm::Frobenius => "err_F",
        });
    }
    head.extend(["thm1", "thm2", "thm2_literal", "note"]);
    writeln!(s, "{}", head.iter().map(|h| format!("{h:>12}")).collect::<String>()).unwrap();
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
    for r in &out.records {
        let mut row = vec![r.k.to_string(), r.observed_rank.to_string(), outcome(&r.predicted_rank, |v| v.to_string())];
        for norm in &cfg.norms {
            row.push(cell(Some(match norm {
                Norm::Spectral => r.empirical_spectral,
                Norm::Frobenius => r.empirical_frobenius,
            })));
        }
        row.push(cell(r.thm1_bound));
        row.push(cell(r.thm2_bound.ok()));
        row.push(cell(r.thm2_literal.ok()));
        row.push(if r.degenerate { "degenerate".into() } else { String::new() });
        writeln!(s, "{}", row.iter().map(|c| format!("{c:>12}")).collect::<String>()).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "thm2 is the singular-value reading (max |lambda|, smallest nonzero |lambda|), square-rooted;").unwrap();
    writeln!(s, "thm2_literal uses the signed lambda_max(A), lambda_min(A) and is squared.").unwrap();
    s
}

fn py_list(values: impl Iterator<Item = Option<f64>>) -> String {
    let items: Vec<String> = values.map(|v| v.map_or("nan".to_string(), fmt_f64)).collect();
    format!("[{}]", items.join(", "))
}

pub fn plot_script(out: &RunOutput) -> String {
    let r = &out.records;
    let k: Vec<String> = r.iter().map(|x| x.k.to_string()).collect();
    format!(
        r#"# Regression error per step with the bounds overlaid.
# seed = {seed}; render with: python3 plot.py
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

nan = float("nan")
k = [{k}]
err_frobenius = {ef}
err_spectral = {es}
thm2_bound = {t2}
thm4_frobenius = {t4f}
thm4_spectral = {t4s}
e_norm = {en}
thm1_bound = {t1}

fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
width = 0.4
top.bar([x - width / 2 for x in k], err_frobenius, width, label="||A - A_k||_F")
top.bar([x + width / 2 for x in k], err_spectral, width, label="||A - A_k||_2")
top.plot(k, thm2_bound, "k--", marker="o", label="Frobenius bound")
top.plot(k, thm4_frobenius, "r:", label="repeated-eigenvalue floor (F)")
top.plot(k, thm4_spectral, "m:", label="repeated-eigenvalue floor (2)")
top.set_ylabel("model regression error")
top.legend()
bottom.bar(k, e_norm, 0.6, label="||E_k||_2")
bottom.plot(k, thm1_bound, "k--", marker="s", label="||I - S_k P_k / Tr(S_k P_k)||_2")
bottom.set_yscale("log")
bottom.set_xlabel("k")
bottom.set_ylabel("relative error operator")
bottom.legend()
fig.tight_layout()
fig.savefig("plot.png", dpi=150)
"#,
        seed = out.config.seed,
        k = k.join(", "),
        ef = py_list(r.iter().map(|x| Some(x.empirical_frobenius))),
        es = py_list(r.iter().map(|x| Some(x.empirical_spectral))),
        t2 = py_list(r.iter().map(|x| x.thm2_bound.ok())),
        t4f = py_list(r.iter().map(|x| x.thm4_frobenius.ok())),
        t4s = py_list(r.iter().map(|x| x.thm4_spectral.ok())),
        en = py_list(r.iter().map(|x| x.e_norm)),
        t1 = py_list(r.iter().map(|x| x.thm1_bound)),
    )
}

/// Writes every artifact of a run into `dir` and returns the paths.
pub fn write_all(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = |name: &str| dir.join(name);
    let text_files = [
        ("report.txt", report(out)),
        ("plot.py", plot_script(out)),
        ("config.json", out.config.to_json() + "\n"),
    ];
    write_records_csv(&out.records, &path("records.csv"))?;
    write_trajectory(&out.trajectory(), &path("trajectory.csv"))?;
    write_matrix(out.system.matrix(), &path("system.csv"))?;
    write_matrix(&out.estimate, &path("estimate.csv"))?;
    for (name, body) in &text_files {
        fs::write(path(name), body).map_err(|e| CliError::io(path(name), e))?;
    }
    Ok(["records.csv", "trajectory.csv", "system.csv", "estimate.csv", "report.txt", "plot.py", "config.json"]
        .iter()
        .map(|n| path(n))
        .collect())
}
