//! End-to-end tests against the compiled binary: exit codes, output files,
//! manifests, config precedence, and thread-count reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn qmt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qmt"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    qmt()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

#[test]
fn validate_quick_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let result = run(
        &["validate", "--quick", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report = read_json(&out.join("validate.json"));
    assert_eq!(report["all_passed"], serde_json::Value::Bool(true));
    assert!(report["checks"].as_array().unwrap().len() >= 20);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "validate");
    assert_eq!(manifest["outputs"][0], "validate.json");
}

#[test]
fn fault_injection_fails_exactly_the_algebra_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let result = run(
        &[
            "validate",
            "--quick",
            "--corrupt",
            "dirac-algebra",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(1));
    let report = read_json(&out.join("validate.json"));
    let failing: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == serde_json::Value::Bool(false))
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(failing, vec!["models.dirac_algebra"]);
}

#[test]
fn chern_real_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let result = run(
        &[
            "chern",
            "--invariant",
            "real",
            "--method",
            "curvature-oracle",
            "--grid",
            "60x60",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let chern = read_json(&out.join("chern.json"));
    let value = chern["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 5e-3, "C_R = {value}");
    assert_eq!(chern["mod2"], serde_json::json!(1));
    assert_eq!(chern["method"], "curvature-oracle");
}

#[test]
fn chern_quench_outputs_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let result = run(
            &[
                "chern",
                "--invariant",
                "real",
                "--method",
                "metric-quench",
                "--grid",
                "12x12",
                "--substeps",
                "40",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(
            result.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        bytes.push(std::fs::read(out.join("chern.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "chern.json differs across thread counts");
}

#[test]
fn config_precedence_three_layers() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    std::fs::write(
        &config_path,
        r#"{"quench": {"delta_lambda": 0.05, "substeps": 17}}"#,
    )
    .unwrap();

    // layer 2: file over defaults
    let out_file = dir.path().join("file");
    let r1 = run(
        &[
            "chern",
            "--config",
            config_path.to_str().unwrap(),
            "--invariant",
            "real",
            "--method",
            "curvature-oracle",
            "--grid",
            "20x20",
            "--out",
            out_file.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(r1.status.success());
    let m1 = read_json(&out_file.join("manifest.json"));
    assert_eq!(m1["config"]["quench"]["delta_lambda"], serde_json::json!(0.05));
    assert_eq!(m1["config"]["quench"]["substeps"], serde_json::json!(17));

    // layer 3: flag over file
    let out_flag = dir.path().join("flag");
    let r2 = run(
        &[
            "chern",
            "--config",
            config_path.to_str().unwrap(),
            "--invariant",
            "real",
            "--method",
            "curvature-oracle",
            "--grid",
            "20x20",
            "--delta",
            "0.02",
            "--out",
            out_flag.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(r2.status.success());
    let m2 = read_json(&out_flag.join("manifest.json"));
    assert_eq!(m2["config"]["quench"]["delta_lambda"], serde_json::json!(0.02));
    assert_eq!(m2["config"]["quench"]["substeps"], serde_json::json!(17));
}

#[test]
fn bad_configuration_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.json");
    std::fs::write(&config_path, r#"{"quemch": {"delta_lambda": 0.05}}"#).unwrap();
    let result = run(
        &[
            "chern",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2));

    let result2 = run(
        &[
            "metric",
            "--preset",
            "fig-9z",
            "--out",
            dir.path().join("y").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(result2.status.code(), Some(2));
}

#[test]
fn coarse_grid_exits_3() {
    // a 2×2 grid leaves the real Chern value 0.11 from the nearest integer,
    // tripping the coarse-grid quality flag
    let dir = tempfile::tempdir().unwrap();
    let result = run(
        &[
            "chern",
            "--invariant",
            "real",
            "--method",
            "curvature-oracle",
            "--grid",
            "2x2",
            "--out",
            dir.path().join("c").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("numerical-quality"), "stderr: {stderr}");
}

#[test]
fn metric_preset_emits_component_and_run_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let result = run(
        &[
            "metric",
            "--preset",
            "fig-1a",
            "--points",
            "3",
            "--substeps",
            "40",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let components = std::fs::read_to_string(out.join("components.csv")).unwrap();
    let mut lines = components.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_value,mu,nu,j,jprime,part,quench,oracle,analytic,abs_error"
    );
    // 3 sweep points × 2 components, real parts only
    assert_eq!(lines.count(), 6);
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert!(runs.starts_with(
        "run_id,family,coords,state,direction,delta_lambda,schedule,t_quench,substeps,gamma"
    ));
    // fig-1a needs the two diagonal-class runs per point
    assert_eq!(runs.lines().count(), 1 + 3 * 2);
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["headline"]["rows"], serde_json::json!(6));
}

#[test]
fn sweep_reports_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let result = run(
        &[
            "sweep",
            "--invariant",
            "real",
            "--grid",
            "16x16",
            "--t-values",
            "0.01,0.001",
            "--delta-values",
            "0.157,0.0314",
            "--substeps",
            "40",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let result_rows = csv.lines().filter(|l| l.starts_with("result,")).count();
    let summary_rows = csv.lines().filter(|l| l.starts_with("summary,")).count();
    assert_eq!(result_rows, 4);
    assert_eq!(summary_rows, 2);
}
