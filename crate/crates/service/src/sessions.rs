//! Sessions persisted as one JSON file per id.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use pitchfit_core::{
    MatchState, ParamSet, PartialAttributeVector, RecommendInputs, Recommendation, StrategyLibrary,
};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seq: usize,
    /// Milliseconds since the Unix epoch; never decreases along a history.
    pub at_ms: u64,
    pub state: MatchState,
    pub recommendation: Recommendation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    pub created_ms: u64,
    pub team: PartialAttributeVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opponent: Option<PartialAttributeVector>,
    pub params: ParamSet,
    /// Append-only.
    pub history: Vec<Snapshot>,
}

impl SessionRecord {
    pub fn inputs(&self, state: MatchState) -> RecommendInputs {
        RecommendInputs {
            team: self.team,
            opponent: self.opponent,
            state,
            params: self.params,
        }
    }
}

/// Body of `POST /sessions/{id}/snapshots`: a new match state and optional
/// replacement profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRequest {
    pub state: MatchState,
    #[serde(default)]
    pub team: Option<PartialAttributeVector>,
    #[serde(default)]
    pub opponent: Option<PartialAttributeVector>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

pub struct SessionStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(SessionStore {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, ServiceError> {
        // ids are uuids; anything else cannot name a session file
        let id = Uuid::parse_str(id)
            .map_err(|_| ServiceError::not_found(format!("no session `{id}`")))?;
        Ok(self.dir.join(format!("{}.json", id.as_hyphenated())))
    }

    fn lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("session lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    async fn write(&self, record: &SessionRecord) -> Result<(), ServiceError> {
        let path = self.path(&record.id)?;
        let tmp = path.with_extension("json.tmp");
        let body =
            serde_json::to_vec_pretty(record).map_err(|e| ServiceError::io(e.to_string()))?;
        tokio::fs::write(&tmp, body)
            .await
            .map_err(|e| ServiceError::io(e.to_string()))?;
        tokio::fs::rename(&tmp, &path)
            .await
            .map_err(|e| ServiceError::io(e.to_string()))
    }

    pub async fn create(
        &self,
        inputs: &RecommendInputs,
        library: &StrategyLibrary,
    ) -> Result<SessionRecord, ServiceError> {
        let recommendation = inputs.rank(library)?;
        let at = now_ms();
        let record = SessionRecord {
            id: Uuid::new_v4().as_hyphenated().to_string(),
            created_ms: at,
            team: inputs.team,
            opponent: inputs.opponent,
            params: inputs.params,
            history: vec![Snapshot {
                seq: 0,
                at_ms: at,
                state: inputs.state,
                recommendation,
            }],
        };
        let lock = self.lock(&record.id);
        let _guard = lock.lock().await;
        self.write(&record).await?;
        Ok(record)
    }

    pub async fn get(&self, id: &str) -> Result<SessionRecord, ServiceError> {
        let path = self.path(id)?;
        let text = match tokio::fs::read_to_string(&path).await {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ServiceError::not_found(format!("no session `{id}`")))
            }
            Err(e) => return Err(ServiceError::io(e.to_string())),
        };
        serde_json::from_str(&text).map_err(|e| ServiceError::io(e.to_string()))
    }

    /// Re-ranks under a new state and appends the result to the history.
    pub async fn append(
        &self,
        id: &str,
        request: &SnapshotRequest,
        library: &StrategyLibrary,
    ) -> Result<SessionRecord, ServiceError> {
        self.path(id)?;
        let lock = self.lock(id);
        let _guard = lock.lock().await;
        let mut record = self.get(id).await?;
        if let Some(team) = request.team {
            record.team = team;
        }
        if request.opponent.is_some() {
            record.opponent = request.opponent;
        }
        let recommendation = record.inputs(request.state).rank(library)?;
        let last = record.history.last().map_or(0, |s| s.at_ms);
        record.history.push(Snapshot {
            seq: record.history.len(),
            at_ms: now_ms().max(last),
            state: request.state,
            recommendation,
        });
        self.write(&record).await?;
        Ok(record)
    }
}
