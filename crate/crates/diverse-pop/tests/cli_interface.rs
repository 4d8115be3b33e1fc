//! End-to-end checks of the command-line interface.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diverse-pop"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

#[test]
fn run_writes_telemetry_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cfg.json",
        r#"{"n":100,"weights":[1.0,1.0],"steps":100000,"seed":5,"snapshot_every":1000}"#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n"], 100);
    assert!(report["convergence_step"].as_u64().unwrap() < 100_000);
    assert_eq!(report["sustainability"]["ok"], true);

    let telemetry = fs::read_to_string(out.join("telemetry.jsonl")).unwrap();
    assert_eq!(telemetry.lines().count(), 101);
    for line in telemetry.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["regions"]["R1"].is_boolean());
    }
}

#[test]
fn identical_seed_means_byte_identical_telemetry() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cfg.json",
        r#"{"n":200,"weights":[1.0,2.0],"steps":50000,"seed":9,"snapshot_every":500}"#,
    );
    let mut outputs = Vec::new();
    for out_name in ["a", "b"] {
        let out = dir.path().join(out_name);
        assert!(bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .success());
        outputs.push(fs::read(out.join("telemetry.jsonl")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    // a different seed must change the trajectory
    let out = dir.path().join("c");
    assert!(bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "10"])
        .status()
        .unwrap()
        .success());
    assert_ne!(outputs[0], fs::read(out.join("telemetry.jsonl")).unwrap());
}

#[test]
fn invalid_weights_are_rejected_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.json",
        r#"{"n":100,"weights":[0.5,1.0],"steps":1000}"#,
    );
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("weight"), "stderr: {stderr}");
}

#[test]
fn malformed_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "broken.json", "{\"n\": 100,\n  \"weights\": [1.0,,]}");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line") || stderr.contains("column"), "stderr: {stderr}");
}

#[test]
fn sweep_emits_rows_plus_summary_independent_of_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cfg.json",
        r#"{"n":100,"weights":[1.0,1.0],"steps":20000,"snapshot_every":500}"#,
    );
    let seeds = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20";
    let mut csvs = Vec::new();
    for (out_name, par) in [("p1", "1"), ("p2", "2")] {
        let out = dir.path().join(out_name);
        assert!(bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .args(["--seeds", seeds, "--parallelism", par, "--out"])
            .arg(&out)
            .status()
            .unwrap()
            .success());
        csvs.push(fs::read_to_string(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1], "sweep output depends on parallelism degree");
    let lines: Vec<&str> = csvs[0].lines().collect();
    assert_eq!(lines.len(), 1 + 20 + 1, "header, 20 seeds, summary");
    assert!(lines[0].starts_with("seed,status,n,k,steps,convergence_step"));
    assert!(lines[21].starts_with("median,complete"));
}

#[test]
fn duplicate_sweep_seeds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cfg.json",
        r#"{"n":50,"weights":[1.0],"steps":100}"#,
    );
    let output = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--seeds", "1,2,2", "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("distinct"));
}

#[test]
fn oracle_suites_pass_within_tolerance() {
    for args in [
        vec!["oracle", "stationary", "--w", "1,2", "--n", "100"],
        vec!["oracle", "perturbed", "--w", "1,1", "--n", "100", "--err", "1e-3"],
        vec!["oracle", "ruin", "--p", "0.6", "--s", "5", "--b", "10"],
        vec!["oracle", "kernel", "--n", "4", "--w", "1,1"],
        vec!["oracle", "chain", "--w", "1,2", "--n", "6", "--steps", "400000"],
    ] {
        let output = bin().args(&args).output().unwrap();
        assert!(
            output.status.success(),
            "{args:?} failed: {}{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

#[test]
fn schema_subcommand_prints_the_contract() {
    let output = bin().arg("schema").output().unwrap();
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    for key in
        ["experiment_config", "telemetry_record", "adversary_event", "sweep_csv_header", "configuration_snapshot"]
    {
        assert!(value.get(key).is_some(), "schema missing '{key}'");
    }
}

#[test]
fn run_exit_code_tracks_engine_validity() {
    // agentwise engine with an adversary schedule is rejected
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.json");
    fs::write(&events, r#"[{"at":10,"kind":"add_colour","weight":1.0,"dark":1}]"#).unwrap();
    let config = write_config(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"n":50,"weights":[1.0],"steps":1000,"engine":"agentwise","events":{:?}}}"#,
            events.to_str().unwrap()
        ),
    );
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
}
