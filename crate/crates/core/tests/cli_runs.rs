use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deadbeat::cli::{SimulateSummary, SweepSummary, EXIT_DEGENERATE, EXIT_OK, EXIT_VALIDATION};
use serde_json::Value;
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn cli(args: &[&str], dir: &Path) -> Output {
    let prefix = dir.join("run");
    Command::new(env!("CARGO_BIN_EXE_deadbeat-obs"))
        .args(args)
        .arg("--out-prefix")
        .arg(&prefix)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_variant(dir: &Path, base: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut value: Value = serde_json::from_str(&fs::read_to_string(config(base)).unwrap()).unwrap();
    edit(&mut value);
    let path = dir.join("variant.json");
    fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
    path
}

#[test]
fn scalar_simulation_is_deadbeat() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["simulate", config("scalar.json").to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SimulateSummary =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run_summary.json")).unwrap()).unwrap();
    assert_eq!(summary.resets, 3);
    assert!(summary.max_post_r_error.unwrap() <= 1e-5);
    let printed: SimulateSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, summary);
}

#[test]
fn estimate_csv_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["simulate", config("lti_oscillator.json").to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(dir.path().join("run_estimate.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let expected =
        ["t", "x_true_0", "x_true_1", "y_true_0", "y_meas_0", "z_0", "z_1", "w_0", "reset_flag", "degenerate_flag"];
    assert_eq!(headers.iter().collect::<Vec<_>>(), expected);
    let rows: Vec<Vec<f64>> =
        reader.records().map(|r| r.unwrap().iter().map(|s| s.parse::<f64>().unwrap()).collect()).collect();
    let summary: SimulateSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), summary.nodes);
    assert_eq!(rows.iter().filter(|r| r[8] == 1.0).count(), summary.resets);
    let last = rows.last().unwrap();
    let final_error = (last[5] - last[1]).abs().max((last[6] - last[2]).abs());
    assert_eq!(final_error, summary.final_error);
}

#[test]
fn clean_frequency_estimate() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["simulate", config("frequency_clean.json").to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SimulateSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary.omega_hat.unwrap() - 3.0).abs() <= 1e-4 * 3.0);
}

#[test]
fn clean_phase_sweep() {
    let dir = TempDir::new().unwrap();
    let path = config("frequency_clean.json");
    let out = cli(&["sweep", path.to_str().unwrap(), "--mode", "phase"], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SweepSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.points, 64);
    assert!(summary.max_rel_error <= 1e-4);
    let mut reader = csv::Reader::from_path(dir.path().join("run_sweep_phase.csv")).unwrap();
    let worst = reader.records().map(|r| r.unwrap()[2].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert_eq!(worst, summary.max_rel_error);
}

#[test]
fn step_override_applies() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["simulate", config("scalar.json").to_str().unwrap(), "--h", "0.002"], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SimulateSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.nodes, 1501);
}

#[test]
fn misaligned_window_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["simulate", config("scalar.json").to_str().unwrap(), "--h", "0.0012"], dir.path());
    assert_eq!(code(&out), EXIT_VALIDATION);
    assert!(stderr(&out).contains("observer.r"));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ \"system\": ").unwrap();
    let out = cli(&["observability", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_VALIDATION);
    assert!(!dir.path().join("run_gram.json").exists());
}

#[test]
fn degenerate_window_with_fail_policy_exits_four() {
    let dir = TempDir::new().unwrap();
    let path = write_variant(dir.path(), "reactor_lumped.json", |v| {
        v["observer"]["on_degenerate"] = Value::from("fail");
    });
    let out = cli(&["simulate", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_DEGENERATE, "{}", stderr(&out));
}

#[test]
fn lumped_reactor_holds_by_default() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["simulate", config("reactor_lumped.json").to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SimulateSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.resets, 0);
    assert_eq!(summary.degenerate_events, 4);
}

#[test]
fn observability_report_flags_indistinguishable_input() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["observability", config("indistinguishable.json").to_str().unwrap()], dir.path());
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run_gram.json")).unwrap()).unwrap();
    assert_eq!(report["certificate"], Value::from("degenerate"));
    assert!(report["partner_output_gap"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn repeated_runs_are_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let path = config("reactor.json");
    let args = ["simulate", path.to_str().unwrap()];
    let (first, second) = (cli(&args, a.path()), cli(&args, b.path()));
    assert_eq!(first.stdout, second.stdout);
    for file in ["run_trace.csv", "run_estimate.csv", "run_summary.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}
