//! End-to-end checks of the `ppilab` binary: outputs, exit codes, and
//! determinism under `PPILAB_THREADS`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ppilab"))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to spawn ppilab")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout should be JSON")
}

#[test]
fn estimate_classical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "y.csv", "y\n1\n2\n3\n");
    let out = run(bin().args(["estimate", "--input"]).arg(&input).args(["--method", "classical"]));
    let json = stdout_json(&out);
    assert_eq!(json["theta_hat"], 2.0);
    assert_eq!(json["method"], "classical");
    assert!(json["ci_low"].as_f64().unwrap() <= 2.0);
}

#[test]
fn estimate_single_sample_hand_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", "y,f\n0,-1\n1,1\n");
    let out = run(bin()
        .args(["estimate", "--input"])
        .arg(&input)
        .args(["--method", "single-sample", "--mu-f", "0", "--var-f", "1"]));
    let json = stdout_json(&out);
    assert_eq!(json["theta_hat"], 0.5);
    assert_eq!(json["lambda_used"], 1.0);
    assert_eq!(json["n_unlabeled"], "infinite");
}

#[test]
fn estimate_missing_f_column_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "y.csv", "y\n1\n2\n");
    let pool = write(dir.path(), "pool.csv", "f\n1\n");
    let out = run(bin()
        .args(["estimate", "--input"])
        .arg(&input)
        .args(["--method", "ppi", "--unlabeled"])
        .arg(&pool));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_degenerate_population_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", "y,f\n0,-1\n1,1\n");
    let out = run(bin()
        .args(["estimate", "--input"])
        .arg(&input)
        .args(["--method", "single-sample", "--mu-f", "0", "--var-f", "0"]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(bin().args(["estimate", "--frobnicate"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn moments_from_csv_and_spec_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.csv", "y,f\n0,1\n1,0\n");
    let out = run(bin().args(["moments", "--input"]).arg(&input));
    let json = stdout_json(&out);
    assert_eq!(json["cov_fy"], -0.5);

    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"type":"gaussian","mu_y":1.0,"mu_f":2.0,"var_y":1.0,"var_f":1.0,"cov_fy":0.3}"#,
    );
    let out = run(bin().args(["moments", "--spec"]).arg(&spec));
    let json = stdout_json(&out);
    assert_eq!(json["cov_y2f2"], 2.58);
}

#[test]
fn theory_split_sample_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"type":"gaussian","mu_y":0.0,"mu_f":0.0,"var_y":1.0,"var_f":1.0,"cov_fy":0.0}"#,
    );
    let out = run(bin()
        .args(["theory", "--spec"])
        .arg(&spec)
        .args(["--n", "2", "--variant", "split-sample"]));
    let json = stdout_json(&out);
    assert_eq!(json["mse_total"], 1.0);
    assert_eq!(json["improves"], false);
}

#[test]
fn oracle_passes_on_binary_spec_and_respects_budget() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "bin.json",
        r#"{"type":"signed-binary","p_nn":0.45,"p_np":0.05,"p_pn":0.05,"p_pp":0.45}"#,
    );
    let out = run(bin()
        .args(["oracle", "--spec"])
        .arg(&spec)
        .args(["--n-min", "2", "--n-max", "4"]));
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.starts_with("n,statistic,oracle_value,formula_value,abs_diff"));
    assert!(table.contains("cov_error_squared"));

    // 10-point support at n = 10 blows the enumeration budget.
    let support: Vec<String> = (0..10).map(|i| format!("[{i}.0,{}.0]", i * i)).collect();
    let big = write(
        dir.path(),
        "big.json",
        &format!(
            r#"{{"type":"finite-discrete","support":[{}],"probs":[0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1]}}"#,
            support.join(",")
        ),
    );
    let out = run(bin()
        .args(["oracle", "--spec"])
        .arg(&big)
        .args(["--n-min", "10", "--n-max", "10"]));
    assert_eq!(out.status.code(), Some(4));

    let empty = write(dir.path(), "empty.json", "");
    let out = run(bin().args(["oracle", "--spec"]).arg(&empty));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plan_examples() {
    let out = run(bin().args([
        "plan",
        "--gaussian-rho",
        "0.3333",
        "--variant",
        "cross-fit",
    ]));
    let json = stdout_json(&out);
    assert_eq!(json["tipping_n"], 12);

    let out = run(bin().args([
        "plan", "--binary", "--tpr", "0.9", "--fpr", "0.1", "--balanced",
    ]));
    let json = stdout_json(&out);
    assert_eq!(json["tipping_n"], 3);

    let out = run(bin().args(["plan", "--gaussian-rho", "0.0", "--n-max", "100"]));
    let json = stdout_json(&out);
    assert!(json["tipping_n"].is_null());

    let out = run(bin().args([
        "plan",
        "--gaussian-rho",
        "0.5",
        "--binary",
        "--tpr",
        "0.9",
        "--fpr",
        "0.1",
    ]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_identical_across_thread_env() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "cfg.json",
        r#"{
            "experiment": "mse",
            "spec": {"type":"signed-binary","p_nn":0.45,"p_np":0.05,"p_pn":0.05,"p_pp":0.45},
            "methods": ["classical", "cross-fit"],
            "n_values": [10, 20],
            "trials": 5000,
            "seed": 20240601
        }"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let prefix = dir.path().join(format!("run_{threads}"));
        let out = run(bin()
            .env("PPILAB_THREADS", threads)
            .args(["simulate", "--config"])
            .arg(&config)
            .args(["--output"])
            .arg(&prefix));
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push((
            fs::read(prefix.with_extension("csv")).unwrap(),
            fs::read(prefix.with_extension("json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);

    let bad = write(dir.path(), "bad.json", r#"{"methods": []}"#);
    let out = run(bin()
        .args(["simulate", "--config"])
        .arg(&bad)
        .args(["--output"])
        .arg(dir.path().join("x")));
    assert_eq!(out.status.code(), Some(2));
}
