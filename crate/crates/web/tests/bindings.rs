use serde_json::{json, Value};

use pitchfit_web::{pilot, recommend, strategies, what_if};

fn pilot_request() -> Value {
    json!({
        "team": {"A1": 0.85, "A2": 0.50, "A4": 0.85, "A5": 0.50, "A8": 0.35},
        "state": {"time_remaining": 0.5, "score_state": 0}
    })
}

#[test]
fn lists_both_libraries() {
    let canonical: Vec<Value> = serde_json::from_str(&strategies("canonical").unwrap()).unwrap();
    let full: Vec<Value> = serde_json::from_str(&strategies("full").unwrap()).unwrap();
    assert_eq!((canonical.len(), full.len()), (5, 20));
    assert!(strategies("tiki-taka").unwrap_err().contains("library"));
}

#[test]
fn recommend_returns_ranking_and_radar() {
    let out: Value =
        serde_json::from_str(&recommend(&pilot_request().to_string(), "canonical").unwrap())
            .unwrap();
    assert_eq!(out["chosen"], "Build-up Play");
    assert_eq!(out["entries"].as_array().unwrap().len(), 5);
    assert_eq!(out["radar"]["strategy"], "Build-up Play");
    let points = out["radar"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert_eq!(points[0], json!(["A1", 0.85, 0.8]));
}

#[test]
fn recommend_reports_invalid_input() {
    let bad = json!({"team": {"A1": 1.4}}).to_string();
    assert!(recommend(&bad, "full").unwrap_err().contains("A1"));
    assert!(recommend("{", "full").is_err());
}

#[test]
fn what_if_energy_promotes_fast_counterattack() {
    let request = json!({"base": pilot_request(), "overrides": {"team": {"A8": 0.8}}});
    let out: Value =
        serde_json::from_str(&what_if(&request.to_string(), "canonical").unwrap()).unwrap();
    assert_eq!(out["base"]["chosen"], "Build-up Play");
    assert_eq!(out["recommendation"]["chosen"], "Fast Counterattack");
    assert_eq!(out["radar"]["strategy"], "Fast Counterattack");
    let a8 = out["radar"]["points"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p[0] == "A8")
        .unwrap()
        .clone();
    assert_eq!(a8, json!(["A8", 0.8, 0.8]));
}

#[test]
fn pilot_with_default_and_shifted_anchors() {
    let out: Value = serde_json::from_str(&pilot(0.85, 0.5, 0.2).unwrap()).unwrap();
    assert_eq!(out["chosen"], "Build-up Play");
    let shifted: Value = serde_json::from_str(&pilot(0.95, 0.5, 0.2).unwrap()).unwrap();
    assert_eq!(shifted["chosen"], "Fast Counterattack");
    assert!(pilot(1.0, 0.5, 0.2).is_err());
}
