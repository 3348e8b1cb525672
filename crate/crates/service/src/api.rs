//! HTTP endpoints.
//!
//! Bodies are read as raw text and parsed with field-path reporting, so a
//! malformed request comes back as `{error, field, message}`.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use pitchfit_core::harness::ScenarioSpec;
use pitchfit_core::{
    whatif, RecommendInputs, Recommendation, StrategyLibrary, WhatIfOutcome, WhatIfOverrides,
};

use crate::error::{parse_json, ServiceError};
use crate::evaluate::{evaluate, EvaluateKind, EvaluateOptions};
use crate::sessions::{SessionRecord, SessionStore, SnapshotRequest};

/// Where the library comes from; reloaded only on request.
#[derive(Debug, Clone)]
pub enum LibrarySource {
    Builtin,
    File(PathBuf),
}

impl LibrarySource {
    pub fn load(&self) -> Result<StrategyLibrary, ServiceError> {
        match self {
            LibrarySource::Builtin => Ok(StrategyLibrary::builtin_default()),
            LibrarySource::File(path) => StrategyLibrary::load(path)
                .map_err(|e| ServiceError::validation(path.display().to_string(), e.to_string())),
        }
    }
}

pub struct AppState {
    library: RwLock<Arc<StrategyLibrary>>,
    source: LibrarySource,
    fixtures: Vec<ScenarioSpec>,
    evaluation_library: StrategyLibrary,
    sessions: SessionStore,
}

impl AppState {
    /// `evaluation_library` backs `/evaluate`; the scenario fixtures are
    /// calibrated against the five canonical templates.
    pub fn new(
        source: LibrarySource,
        fixtures: Vec<ScenarioSpec>,
        evaluation_library: StrategyLibrary,
        sessions: SessionStore,
    ) -> Result<Self, ServiceError> {
        let library = source.load()?;
        Ok(AppState {
            library: RwLock::new(Arc::new(library)),
            source,
            fixtures,
            evaluation_library,
            sessions,
        })
    }

    fn library(&self) -> Arc<StrategyLibrary> {
        self.library.read().expect("library lock poisoned").clone()
    }
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ServiceError>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/strategies", get(strategies))
        .route("/strategies/reload", post(reload))
        .route("/recommend", post(recommend))
        .route("/whatif", post(what_if))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/snapshots", post(append_snapshot))
        .route("/evaluate/{kind}", post(run_evaluation))
        .with_state(state)
}

async fn strategies(State(state): State<Shared>) -> Json<StrategyLibrary> {
    Json((*state.library()).clone())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReloadResponse {
    pub count: usize,
}

async fn reload(State(state): State<Shared>) -> ApiResult<Json<ReloadResponse>> {
    let library = state.source.load()?;
    let count = library.len();
    *state.library.write().expect("library lock poisoned") = Arc::new(library);
    log::info!("library reloaded with {count} strategies");
    Ok(Json(ReloadResponse { count }))
}

async fn recommend(State(state): State<Shared>, body: String) -> ApiResult<Json<Recommendation>> {
    let inputs: RecommendInputs = parse_json(&body)?;
    Ok(Json(inputs.rank(&state.library())?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub base: RecommendInputs,
    #[serde(default)]
    pub overrides: WhatIfOverrides,
}

async fn what_if(State(state): State<Shared>, body: String) -> ApiResult<Json<WhatIfOutcome>> {
    let request: WhatIfRequest = parse_json(&body)?;
    Ok(Json(whatif(
        &request.base,
        &request.overrides,
        &state.library(),
    )?))
}

async fn create_session(
    State(state): State<Shared>,
    body: String,
) -> ApiResult<(StatusCode, Json<SessionRecord>)> {
    let inputs: RecommendInputs = parse_json(&body)?;
    let record = state.sessions.create(&inputs, &state.library()).await?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn get_session(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionRecord>> {
    Ok(Json(state.sessions.get(&id).await?))
}

async fn append_snapshot(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<SessionRecord>> {
    let request: SnapshotRequest = parse_json(&body)?;
    Ok(Json(
        state
            .sessions
            .append(&id, &request, &state.library())
            .await?,
    ))
}

async fn run_evaluation(
    State(state): State<Shared>,
    Path(kind): Path<String>,
    body: String,
) -> ApiResult<Json<Value>> {
    let kind: EvaluateKind = kind.parse()?;
    let options: EvaluateOptions = if body.trim().is_empty() {
        EvaluateOptions::default()
    } else {
        parse_json(&body)?
    };
    let state = state.clone();
    // Monte Carlo runs are CPU-bound
    let evaluation = tokio::task::spawn_blocking(move || {
        evaluate(kind, &options, &state.fixtures, &state.evaluation_library)
    })
    .await
    .map_err(|e| ServiceError::io(e.to_string()))??;
    Ok(Json(evaluation.report))
}
