//! End-to-end checks of the binary: exit codes, report files, and the
//! checkpoint → norms round trip, all on desk-sized grids.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strip-hydro"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_config_is_a_validation_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["converge", "--config", "definitely-not-here.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("definitely-not-here.cfg"),
        "stderr should name the path: {}",
        stderr(&out)
    );
}

#[test]
fn malformed_config_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "[grid]\nnx = 16\nny = 17\nwidgets = 3\n").unwrap();
    let out = run(&["solve-hydro", "--config", "bad.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("widgets"), "stderr: {}", stderr(&out));
}

#[test]
fn solve_ans_checkpoints_round_trip_through_norms() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.cfg"),
        "[grid]\nnx = 16\nny = 17\n\
         [ans]\neps = 0.2\ndt = 1e-3\nt_end = 0.02\n\
         [initial]\ndelta = 1e-2\nk0 = 1\na = 0.5\n",
    )
    .unwrap();
    let out = run(
        &["solve-ans", "--config", "run.cfg", "--checkpoint-every", "10"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(tmp.path().join("norms.csv").exists());
    let ckpt = tmp.path().join("checkpoint_000020.strp");
    assert!(ckpt.exists(), "final checkpoint written");

    let norms = run(&["norms", "--checkpoint", "checkpoint_000020.strp"], tmp.path());
    assert_eq!(norms.status.code(), Some(0), "stderr: {}", stderr(&norms));
    let text = String::from_utf8_lossy(&norms.stdout).into_owned();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("time,s,besov_norm,eta,theta,zeta,radius_estimate"),
        "full output: {text}"
    );
    let row = lines.next().expect("one data row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 7);
    let t: f64 = fields[0].parse().unwrap();
    assert!((t - 0.02).abs() < 1e-12, "checkpoint time {t}");
    assert!(fields[2].parse::<f64>().unwrap() > 0.0, "positive norm");
    assert!(lines.next().is_none(), "exactly one row");

    // --checkpoint-every 0 cannot mean anything; reject it up front.
    let zero = run(
        &["solve-ans", "--config", "run.cfg", "--checkpoint-every", "0"],
        tmp.path(),
    );
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn solve_hydro_writes_the_decay_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("run.cfg"),
        "[grid]\nnx = 16\nny = 17\n\
         [run]\ndt = 1e-3\nt_end = 0.05\nsample_every = 10\n\
         [initial]\ndelta = 1e-2\nk0 = 1\na = 0.5\n",
    )
    .unwrap();
    let out = run(&["solve-hydro", "--config", "run.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let decay = fs::read_to_string(tmp.path().join("decay.csv")).unwrap();
    let mut lines = decay.lines();
    assert_eq!(lines.next(), Some("t,l2,b_half"));
    assert!(lines.count() >= 2, "initial and final samples at least");
}

#[test]
fn converge_writes_csv_and_summary_on_a_tiny_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("sweep.cfg"),
        "[grid]\nnx = 16\nny = 17\n\
         [run]\ndt = 1e-3\nt_end = 0.05\neps_list = 0.4, 0.2, 0.1\nsample_every = 10\n\
         [initial]\ndelta = 1e-2\nk0 = 1\na = 0.5\n",
    )
    .unwrap();
    let out = run(&["converge", "--config", "sweep.cfg", "--out", "reports"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let csv = fs::read_to_string(tmp.path().join("reports/convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,E_half,E_dy,E_three_half"));
    assert_eq!(lines.count(), 3, "one row per ε");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("reports/summary.json")).unwrap())
            .unwrap();
    let obj = json.as_object().unwrap();
    for key in ["slope", "residual", "kappa", "eta_final", "theta_final", "zeta_final", "alive"] {
        assert!(obj.contains_key(key), "summary.json missing {key}");
    }
    assert_eq!(obj.len(), 7);
    assert!(json["alive"].is_boolean());
}

#[test]
fn selftest_exits_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.lines().filter(|l| l.starts_with("ok - ")).count() >= 7, "output: {text}");
}
