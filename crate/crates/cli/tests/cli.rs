use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regcert_cli::output::{evaluate, report, Status, RECORDS_HEADER};
use regcert_cli::{run, ExperimentConfig};
use regcert_core::{fit_batch, Tolerance};

fn regcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regcert")).args(args).output().expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

const REPEATED: &str = r#"{"system": {"kind": "spectrum", "values": [2, 2, 3, 5]}, "steps": 8, "seed": 7}"#;
const SIMPLE: &str = r#"{"system": {"kind": "spectrum", "values": [0.5, -0.8, 1.1, 1.6, -2.0]}, "steps": 7, "seed": 3}"#;

#[test]
fn demo_writes_header_and_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let o = regcert(&["demo", "petersen", "--steps", "3", "--out-dir", path_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("records.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], RECORDS_HEADER.join(","));
    assert_eq!(lines[0], "k,observed_rank,predicted_rank,err_spectral,err_frobenius,thm1_bound,thm2_bound,thm4_spectral,thm4_frobenius,degenerate,lemma3_residual");
    for f in ["trajectory.csv", "system.csv", "estimate.csv", "report.txt", "plot.py", "config.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("thm4: N/A (all eigenvalues simple)"), "{stdout}");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REPEATED);
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = regcert(&["run", path_arg(&cfg), "--out-dir", path_arg(&out)]);
        assert!(o.status.success());
        files.push((std::fs::read(out.join("records.csv")).unwrap(), std::fs::read(out.join("estimate.csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);

    let out = dir.path().join("c");
    assert!(regcert(&["run", path_arg(&cfg), "--seed", "8", "--out-dir", path_arg(&out)]).status.success());
    assert_ne!(std::fs::read(out.join("records.csv")).unwrap(), files[0].0);
}

#[test]
fn run_then_fit_reproduces_the_estimate_bits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMPLE);
    let run_dir = dir.path().join("run");
    let fit_dir = dir.path().join("fit");
    assert!(regcert(&["run", path_arg(&cfg), "--out-dir", path_arg(&run_dir)]).status.success());
    let o = regcert(&["fit", path_arg(&run_dir.join("trajectory.csv")), "--out-dir", path_arg(&fit_dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read_to_string(fit_dir.join("model.csv")).unwrap(),
        std::fs::read_to_string(run_dir.join("estimate.csv")).unwrap()
    );

    // and both equal the batch fit of the same snapshots
    let out = run(&config(SIMPLE)).unwrap();
    let batch = fit_batch(&out.log, Tolerance::default()).unwrap();
    assert_eq!(batch, out.estimate);
    let fit_lines = std::fs::read_to_string(fit_dir.join("fit_records.csv")).unwrap();
    assert_eq!(fit_lines.lines().count(), 1 + 8);
}

#[test]
fn fitted_model_recovers_a_simple_system() {
    let out = run(&config(SIMPLE)).unwrap();
    let a = out.system.matrix();
    assert!((a - &out.estimate).norm() <= 1e-8 * a.norm());
}

#[test]
fn repeated_spectrum_error_is_forced() {
    let out = run(&config(REPEATED)).unwrap();
    for r in &out.records {
        assert_eq!(r.observed_rank, (r.k + 1).min(3), "k = {}", r.k);
        if r.k >= 3 {
            assert!((r.empirical_spectral - 2.0).abs() <= 1e-8, "k = {}: {}", r.k, r.empirical_spectral);
            assert!((r.empirical_frobenius.powi(2) - 4.0).abs() <= 1e-7);
        }
    }
    let text = report(&out);
    assert!(text.contains("thm4: PASS"), "{text}");
    assert!(evaluate(&out).iter().all(|c| c.status != Status::Fail), "{text}");
}

#[test]
fn identity_flags_the_first_step_degenerate() {
    let cfg = config(r#"{"system": {"kind": "matrix", "rows": [[1, 0], [0, 1]]}, "initial_condition": {"kind": "vector", "values": [0.6, 0.8]}, "steps": 3}"#);
    let out = run(&cfg).unwrap();
    assert_eq!(out.records.len(), 3);
    assert!(out.records[0].degenerate);
    assert_eq!(out.records[0].k, 1);
    assert_eq!(out.records[0].thm1_bound, None);
}

#[test]
fn petersen_run_certifies_every_nondegenerate_step() {
    let out = run(&ExperimentConfig::from_json(regcert_cli::config::PETERSEN_DEMO).unwrap()).unwrap();
    assert_eq!(out.records.len(), 15);
    let checks = evaluate(&out);
    for name in ["thm1", "thm2"] {
        let c = checks.iter().find(|c| c.name == name).unwrap();
        assert_eq!(c.status, Status::Pass, "{}", c.line());
    }
}

#[test]
#[ignore = "not attainable in double precision: X_9 has condition number ~1e12 and numeric rank stalls at 9; the acceptance suite reports it"]
fn petersen_error_vanishes_from_step_ten() {
    let out = run(&ExperimentConfig::from_json(regcert_cli::config::PETERSEN_DEMO).unwrap()).unwrap();
    for r in out.records.iter().filter(|r| r.k >= 10) {
        assert!(r.empirical_frobenius <= 1e-8, "k = {}: {}", r.k, r.empirical_frobenius);
    }
}

#[test]
fn bad_config_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"system": {"kind": "spectrum", "values": [1, 2]}, "steps": -3}"#);
    let o = regcert(&["run", path_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("steps"));

    let o = regcert(&["demo", "petersen", "--tolerance=-1", "--out-dir", path_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank_tolerance"));

    assert_eq!(regcert(&["demo", "lorenz"]).status.code(), Some(1));
}

#[test]
fn nan_cell_exits_one_with_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    std::fs::write(&data, "1,2,3\n4,NaN,6\n7,8,9\n").unwrap();
    let o = regcert(&["fit", path_arg(&data), "--out-dir", path_arg(&dir.path().join("fit"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("column 2"), "{err}");
}

#[test]
fn missing_files_exit_two() {
    let o = regcert(&["run", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = regcert(&["fit", "/nonexistent/data.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = regcert(&["demo", "petersen", "--steps", "2", "--out-dir", path_arg(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn two_row_series_fits_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    std::fs::write(&data, "1,0\n0.5,0.5\n").unwrap();
    let fit_dir = dir.path().join("fit");
    assert!(regcert(&["fit", path_arg(&data), "--out-dir", path_arg(&fit_dir)]).status.success());
    let records = std::fs::read_to_string(fit_dir.join("fit_records.csv")).unwrap();
    assert_eq!(records, "k,observed_rank,residual_frobenius\n0,1,0e0\n");
}
