//! Browser bindings for the recommender.
//!
//! Every operation takes and returns JSON text so the page needs no generated
//! TypeScript types. The plain functions are also callable natively.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use pitchfit_core::harness::{pilot_replication_with, radar_series, RadarSeries};
use pitchfit_core::{
    whatif, CategoricalAnchors, PartialAttributeVector, RecommendInputs, Recommendation,
    StrategyLibrary, WhatIfOutcome, WhatIfOverrides,
};

/// Same body as `POST /whatif`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub base: RecommendInputs,
    #[serde(default)]
    pub overrides: WhatIfOverrides,
}

#[derive(Debug, Serialize)]
pub struct RecommendView {
    #[serde(flatten)]
    pub recommendation: Recommendation,
    pub radar: RadarSeries,
}

#[derive(Debug, Serialize)]
pub struct WhatIfView {
    #[serde(flatten)]
    pub outcome: WhatIfOutcome,
    pub radar: RadarSeries,
}

fn library(name: &str) -> Result<StrategyLibrary, String> {
    match name {
        "canonical" => Ok(StrategyLibrary::builtin_canonical()),
        "full" | "default" => Ok(StrategyLibrary::builtin_default()),
        other => Err(format!("library: unknown library {other:?}")),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn radar(team: &PartialAttributeVector, library: &StrategyLibrary, name: &str) -> RadarSeries {
    let template = library
        .by_name(name)
        .expect("chosen strategy comes from the library");
    radar_series(team, template)
}

/// Lists the templates of `"canonical"` or `"full"`.
pub fn strategies(library_name: &str) -> Result<String, String> {
    library(library_name)?.to_json().map_err(|e| e.to_string())
}

/// Ranks a `RecommendInputs` body and adds the radar series of the pick.
pub fn recommend(request: &str, library_name: &str) -> Result<String, String> {
    let lib = library(library_name)?;
    let inputs: RecommendInputs = parse(request)?;
    let recommendation = inputs.rank(&lib).map_err(|e| e.to_string())?;
    let radar = radar(&inputs.team, &lib, &recommendation.chosen);
    to_json(&RecommendView {
        recommendation,
        radar,
    })
}

/// Applies overrides to a base request and reports rank changes.
pub fn what_if(request: &str, library_name: &str) -> Result<String, String> {
    let lib = library(library_name)?;
    let request: WhatIfRequest = parse(request)?;
    let outcome = whatif(&request.base, &request.overrides, &lib).map_err(|e| e.to_string())?;
    let mut team = request.base.team;
    for (&attribute, &value) in &request.overrides.team {
        team = team.with(attribute, value).map_err(|e| e.to_string())?;
    }
    let radar = radar(&team, &lib, &outcome.recommendation.chosen);
    to_json(&WhatIfView { outcome, radar })
}

/// Pilot match replication with custom H/M/L anchors.
pub fn pilot(high: f64, medium: f64, low: f64) -> Result<String, String> {
    let anchors = CategoricalAnchors::shifted(high, medium, low).map_err(|e| e.to_string())?;
    let report = pilot_replication_with(&anchors, &StrategyLibrary::builtin_canonical())
        .map_err(|e| e.to_string())?;
    to_json(&report)
}

#[wasm_bindgen(js_name = strategies)]
pub fn strategies_js(library_name: &str) -> Result<String, JsError> {
    strategies(library_name).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = recommend)]
pub fn recommend_js(request: &str, library_name: &str) -> Result<String, JsError> {
    recommend(request, library_name).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = whatIf)]
pub fn what_if_js(request: &str, library_name: &str) -> Result<String, JsError> {
    what_if(request, library_name).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pilot)]
pub fn pilot_js(high: f64, medium: f64, low: f64) -> Result<String, JsError> {
    pilot(high, medium, low).map_err(|e| JsError::new(&e))
}
