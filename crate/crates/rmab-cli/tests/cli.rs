//! End-to-end checks of the `rmab` binary: deterministic outputs, exit
//! codes, and validation diagnostics.

use std::path::PathBuf;
use std::process::{Command, Output};

fn rmab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("rmab_cli_{name}"))
}

#[test]
fn scenarios_lists_all_presets() {
    let out = rmab(&["scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "fig_5arm",
        "fig_10arm",
        "fig_closegap",
        "fig_20state",
        "fig_bursty",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_writes_csv_and_sidecar_and_reruns_identically() {
    let csv_path = temp_path("rerun.csv");
    let args = [
        "run",
        "--scenario",
        "fig_5arm",
        "--policies",
        "asr,oracle",
        "--horizon",
        "4000",
        "--runs",
        "5",
        "--seed",
        "9",
        "--checkpoints",
        "6",
        "--asr-scale",
        "0.003",
        "--out",
    ];
    let path_str = csv_path.to_str().unwrap();
    let out = rmab(&args.iter().chain([&path_str]).copied().collect::<Vec<_>>());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(&csv_path).unwrap();
    let sidecar: serde_json::Value = serde_json::from_slice(
        &std::fs::read(format!("{path_str}.config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["config"]["scenario"], "fig_5arm");
    assert_eq!(sidecar["scenario"]["arms"].as_array().unwrap().len(), 5);

    let out = rmab(&args.iter().chain([&path_str]).copied().collect::<Vec<_>>());
    assert!(out.status.success());
    let second = std::fs::read(&csv_path).unwrap();
    assert_eq!(first, second, "rerun changed the CSV bytes");

    let header = String::from_utf8(first).unwrap();
    assert!(header.starts_with("t,policy,mean_regret,std_err,normalized\n"));
}

#[test]
fn stdout_carries_only_data() {
    let out = rmab(&[
        "run",
        "--scenario",
        "fig_5arm",
        "--policies",
        "oracle",
        "--horizon",
        "500",
        "--runs",
        "2",
        "--checkpoints",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,policy,mean_regret,std_err,normalized"
    );
    assert!(lines.clone().all(|l| l.contains(",oracle,")));
    // Progress went to stderr, not stdout.
    assert!(!text.contains("runs, horizon"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("oracle"));
}

#[test]
fn unknown_scenario_fails_nonzero_with_diagnostic() {
    let out = rmab(&["run", "--scenario", "fig_nope", "--runs", "1", "--horizon", "200"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unknown scenario preset"));
}

#[test]
fn invalid_custom_scenario_reports_the_bad_row() {
    let path = temp_path("bad_scenario.json");
    std::fs::write(
        &path,
        r#"{"arms": [{"rewards": [0.1, 1.0], "transition": [[0.9, 0.1], [0.3, 0.8]]}]}"#,
    )
    .unwrap();
    let out = rmab(&["validate", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("row 1"), "stderr: {err}");
}

#[test]
fn custom_scenario_runs_end_to_end() {
    let path = temp_path("ok_scenario.json");
    std::fs::write(
        &path,
        r#"{"name": "pair", "arms": [
            {"rewards": [0.1, 1.0], "transition": [[0.9, 0.1], [0.2, 0.8]]},
            {"rewards": [0.1, 1.0], "transition": [[0.5, 0.5], [0.1, 0.9]]}
        ]}"#,
    )
    .unwrap();
    let out = rmab(&["validate", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = rmab(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--policies",
        "asr,rca",
        "--horizon",
        "1000",
        "--runs",
        "3",
        "--checkpoints",
        "4",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(",asr,"));
    assert!(text.contains(",rca,"));
}

#[test]
fn theoretical_mode_requires_parameters() {
    let out = rmab(&[
        "run",
        "--scenario",
        "fig_5arm",
        "--mode",
        "theoretical",
        "--horizon",
        "500",
        "--runs",
        "1",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("epsilon"));
}

#[test]
fn bound_curve_appears_when_configured() {
    let out = rmab(&[
        "run",
        "--scenario",
        "fig_5arm",
        "--policies",
        "oracle",
        "--epsilon",
        "0.01",
        "--delta",
        "0.1",
        "--bound",
        "--horizon",
        "1000",
        "--runs",
        "1",
        "--checkpoints",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(",bound,"));
}
