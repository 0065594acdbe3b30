//! End-to-end tests of the `pairig` binary surface.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pairig"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

const TRAFFIC_CONFIG: &str = r#"{
    "schema": "pairig-config/1",
    "problem": {"type": "traffic", "samples": 100, "agents": 10, "seed": 7},
    "solver": "pair-ig",
    "schedule": {"type": "rate", "gamma0": 0.1, "eta0": 0.1, "b": 0.25},
    "r": 0.0,
    "epochs": 40,
    "seed": 7
}"#;

#[test]
fn run_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TRAFFIC_CONFIG);
    let out = dir.path().join("trace.csv");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{status:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(
        "epoch,agent,gamma,eta,objective,infeasibility,consensus_dist,invariant_max_residual"
    ));
    assert!(out.with_file_name("trace.csv.sidecar.json").exists());
}

#[test]
fn run_rejects_bad_config_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &TRAFFIC_CONFIG.replace("\"r\": 0.0", "\"r\": 0.0, \"typo_key\": 1"),
    );
    let out = dir.path().join("trace.csv");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let status = bin().args(["run", "--nonsense"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn validate_passes_on_traffic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TRAFFIC_CONFIG);
    let out = bin()
        .args(["validate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("validation passed"), "{text}");
}

#[test]
fn oracle_solves_the_reference_example() {
    let out = bin()
        .args(["oracle", "--M", "identity2", "--q", "-0.5,3", "--box", "0,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), "(0.5, 0)");
}

#[test]
fn oracle_accepts_explicit_matrices() {
    let out = bin()
        .args(["oracle", "--M", "1,0;0,1", "--q", "0,-2", "--box", "-1,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), "(0, 1)");
}

#[test]
fn bounds_prints_values_for_valid_inputs() {
    let out = bin()
        .args([
            "bounds",
            "--N",
            "100",
            "--gamma0",
            "1.0",
            "--eta0",
            "1.0",
            "--b",
            "0.25",
            "--subgradient-bound",
            "1.0",
            "--mapping-bound",
            "1.0",
            "--set-norm-bound",
            "1.0",
            "--objective-bound",
            "1.0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("suboptimality_bound:"), "{text}");
    assert!(text.contains("dual_gap_bound:"), "{text}");
}

#[test]
fn bounds_refuses_n_below_threshold_with_exit_2() {
    // r = 0.5 needs N ≥ 2^4 − 1 = 15.
    let out = bin()
        .args([
            "bounds",
            "--N",
            "10",
            "--gamma0",
            "1.0",
            "--eta0",
            "1.0",
            "--b",
            "0.25",
            "--r",
            "0.5",
            "--subgradient-bound",
            "1.0",
            "--mapping-bound",
            "1.0",
            "--set-norm-bound",
            "1.0",
            "--objective-bound",
            "1.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("refused"), "{text}");
}

#[test]
fn run_supports_custom_problems_and_baselines() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("problem.json");
    std::fs::write(
        &problem,
        r#"{
            "dim": 2,
            "agents": 2,
            "set": {"type": "box", "lower": [-1.0, -1.0], "upper": [1.0, 1.0]},
            "mapping": {"matrix": [[1.0, 0.0], [0.0, 1.0]], "offset": [-0.5, 0.25]},
            "objective": {"type": "quadratic", "centers": [[0.0, 0.0], [0.2, -0.2]], "weight": 1.0}
        }"#,
    )
    .unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "schema": "pairig-config/1",
            "problem": {"type": "custom", "path": "problem.json"},
            "solver": "projected-ig",
            "schedule": {"type": "rate", "gamma0": 0.1, "eta0": 0.1, "b": 0.25},
            "epochs": 50,
            "seed": 3
        }"#,
    );
    let out_path = dir.path().join("trace.csv");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(out_path.exists());
}
