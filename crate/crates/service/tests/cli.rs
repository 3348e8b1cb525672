use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use pitchfit_core::harness::default_scenarios;
use pitchfit_core::{Recommendation, StrategyLibrary};
use pitchfit_service::api::{router, AppState, LibrarySource};
use pitchfit_service::sessions::SessionStore;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn pitchfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pitchfit"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn pilot_args<'a>(team: &'a str, library: &'a str) -> Vec<&'a str> {
    vec![
        "recommend",
        "--team",
        team,
        "--library",
        library,
        "--time-remaining",
        "0.5",
        "--score-state",
        "0",
    ]
}

#[test]
fn recommend_pilot_prints_build_up_first() {
    let team = fixture("pilot_team.json");
    let library = fixture("canonical_library.json");
    let out = pitchfit(&pilot_args(
        team.to_str().unwrap(),
        library.to_str().unwrap(),
    ));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    assert!(first.trim_start().starts_with("1  Build-up Play"), "{text}");
    assert!(text.contains("recommended: Build-up Play"));
    assert!(text.contains("A8"));
}

#[test]
fn missing_team_file_exits_2_naming_the_path() {
    let out = pitchfit(&["recommend", "--team", "/no/such/team.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/no/such/team.json"));
}

#[test]
fn invalid_state_names_the_field() {
    let team = fixture("pilot_team.json");
    let out = pitchfit(&[
        "recommend",
        "--team",
        team.to_str().unwrap(),
        "--time-remaining",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("time_remaining"), "{}", stderr(&out));

    let out = pitchfit(&[
        "recommend",
        "--team",
        team.to_str().unwrap(),
        "--score-state",
        "sideways",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_team_value_names_the_attribute() {
    let dir = tempfile::tempdir().unwrap();
    let team = dir.path().join("team.json");
    std::fs::write(&team, r#"{"A1": 0.5, "A3": 1.2}"#).unwrap();
    let out = pitchfit(&["recommend", "--team", team.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("A3"), "{}", stderr(&out));
}

#[test]
fn json_output_is_a_recommendation() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let team = fixture("pilot_team.json");
    let library = fixture("canonical_library.json");
    let mut args = pilot_args(team.to_str().unwrap(), library.to_str().unwrap());
    args.extend(["--json", json.to_str().unwrap()]);
    let out = pitchfit(&args);
    assert_eq!(out.status.code(), Some(0));
    let rec: Recommendation =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rec.chosen, "Build-up Play");
    assert_eq!(rec.entries.len(), 5);
}

#[tokio::test]
async fn cli_and_api_agree() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let team = fixture("pilot_team.json");
    let library = fixture("canonical_library.json");
    let mut args = pilot_args(team.to_str().unwrap(), library.to_str().unwrap());
    args.extend(["--json", json.to_str().unwrap()]);
    assert_eq!(pitchfit(&args).status.code(), Some(0));
    let from_cli: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();

    let state = AppState::new(
        LibrarySource::File(library),
        default_scenarios(),
        StrategyLibrary::builtin_canonical(),
        SessionStore::open(dir.path().join("sessions")).unwrap(),
    )
    .unwrap();
    let request = Request::post("/recommend")
        .body(Body::from(include_str!("fixtures/pilot_request.json")))
        .unwrap();
    let response = router(Arc::new(state)).oneshot(request).await.unwrap();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let from_api: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(from_cli, from_api);
}

#[test]
fn evaluate_pilot_prints_the_distance_table() {
    let out = pitchfit(&["evaluate", "pilot"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for (name, d) in [
        ("Build-up Play", "0.4444"),
        ("Fast Counterattack", "0.4664"),
        ("High Pressing", "0.6305"),
        ("Gegenpressing", "0.6305"),
        ("Positional Defense", "0.9042"),
    ] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains(d), "{line}");
    }
    assert!(text.contains("recommended: Build-up Play"));
}

#[test]
fn zero_noise_robustness_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pitchfit(&[
        "evaluate",
        "robustness",
        "--sigma",
        "0",
        "--k",
        "10",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["mean_r"], 1.0);
    for r in report["input_noise"].as_array().unwrap() {
        assert_eq!(r["r"], 1.0);
        assert_eq!(r["runs"], 10);
    }
    assert!(dir.path().join("robustness.csv").exists());
}

#[test]
fn shipped_scenarios_all_pass() {
    let out = pitchfit(&["evaluate", "scenarios"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("4/4 scenarios passed"));
}

#[test]
fn failed_expectation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut specs: Vec<Value> =
        serde_json::from_str(pitchfit_core::harness::DEFAULT_SCENARIOS_JSON).unwrap();
    specs[0]["expected_top"] = serde_json::json!(["Positional Defense"]);
    let path = dir.path().join("fixtures.json");
    std::fs::write(&path, serde_json::to_string(&specs).unwrap()).unwrap();
    let out = pitchfit(&[
        "evaluate",
        "scenarios",
        "--fixtures",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL Energetic and Balanced"));
}

#[test]
fn invalid_fixtures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut specs: Vec<Value> =
        serde_json::from_str(pitchfit_core::harness::DEFAULT_SCENARIOS_JSON).unwrap();
    specs[1]["expected_top"] = serde_json::json!([]);
    let path = dir.path().join("fixtures.json");
    std::fs::write(&path, serde_json::to_string(&specs).unwrap()).unwrap();
    let out = pitchfit(&[
        "evaluate",
        "scenarios",
        "--fixtures",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("expected_top"), "{}", stderr(&out));

    std::fs::write(
        &path,
        r#"[{"name": "x", "team": {"A1": "high"}, "expected_top": ["a"]}]"#,
    )
    .unwrap();
    let out = pitchfit(&[
        "evaluate",
        "scenarios",
        "--fixtures",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fixtures.json"), "{}", stderr(&out));
}

#[test]
fn sensitivity_exports_one_row_per_scenario_alpha_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out = pitchfit(&[
        "evaluate",
        "sensitivity",
        "--alphas",
        "0.1,0.3,0.5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("scenario,alpha,strategy,d_comb"));
    assert_eq!(csv.lines().count(), 1 + 4 * 3 * 5);
}
