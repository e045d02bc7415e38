//! In-memory networks and sessions, with optional JSON snapshots.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard, PoisonError, RwLock};

use bnx_core::{Network, Scenario, ScenarioKind, TargetQuery};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub network_id: String,
    pub target: Option<TargetQuery>,
    pub scenario: Scenario,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// Everything the store holds, in a serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub networks: Vec<Network>,
    pub sessions: Vec<Session>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot format: {0}")]
    Format(#[from] serde_json::Error),
    #[error("snapshot session {session}: {reason}")]
    Session { session: String, reason: String },
    #[error("snapshot holds network {0} twice")]
    DuplicateNetwork(String),
}

type SessionCell = Arc<Mutex<Session>>;

/// Networks are immutable once stored. Each session sits behind its own
/// lock so updates to one session never wait on another.
#[derive(Debug, Default)]
pub struct Store {
    networks: RwLock<BTreeMap<String, Arc<Network>>>,
    sessions: RwLock<BTreeMap<String, SessionCell>>,
}

fn lock(cell: &Mutex<Session>) -> MutexGuard<'_, Session> {
    cell.lock().unwrap_or_else(PoisonError::into_inner)
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn add_network(&self, net: Network) -> Result<String, ApiError> {
        let mut nets = self.networks.write().unwrap_or_else(PoisonError::into_inner);
        let id = net.id().to_string();
        if nets.contains_key(&id) {
            return Err(ApiError::new(
                axum::http::StatusCode::CONFLICT,
                "duplicate_network",
                format!("network {id} already exists"),
            )
            .with_detail(serde_json::json!({ "id": id })));
        }
        nets.insert(id.clone(), Arc::new(net));
        Ok(id)
    }

    pub fn network(&self, id: &str) -> Result<Arc<Network>, ApiError> {
        self.networks
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("network", id))
    }

    pub fn create_session(&self, network_id: &str) -> Result<Session, ApiError> {
        self.network(network_id)?;
        let now = Utc::now();
        let session = Session {
            id: uuid::Uuid::new_v4().to_string(),
            network_id: network_id.to_string(),
            target: None,
            scenario: Scenario::actual(),
            created_at: now,
            updated_at: now,
        };
        self.sessions
            .write()
            .unwrap_or_else(PoisonError::into_inner)
            .insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    fn cell(&self, id: &str) -> Result<SessionCell, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    /// A consistent copy of the session.
    pub fn session(&self, id: &str) -> Result<Session, ApiError> {
        let cell = self.cell(id)?;
        let session = lock(&cell).clone();
        Ok(session)
    }

    /// Session copy together with its network.
    pub fn snapshot_of(&self, id: &str) -> Result<(Session, Arc<Network>), ApiError> {
        let session = self.session(id)?;
        let net = self.network(&session.network_id)?;
        Ok((session, net))
    }

    pub fn set_target(&self, id: &str, target: TargetQuery) -> Result<Session, ApiError> {
        let cell = self.cell(id)?;
        let mut session = lock(&cell);
        let net = self.network(&session.network_id)?;
        session.scenario.validate_for(&net, Some(&target))?;
        session.target = Some(target);
        session.updated_at = Utc::now();
        Ok(session.clone())
    }

    /// Replaces all findings at once.
    pub fn set_findings(&self, id: &str, findings: BTreeMap<String, String>) -> Result<Session, ApiError> {
        let cell = self.cell(id)?;
        let mut session = lock(&cell);
        let net = self.network(&session.network_id)?;
        let scenario = Scenario {
            findings,
            kind: ScenarioKind::Actual,
        };
        scenario.validate_for(&net, session.target.as_ref())?;
        session.scenario = scenario;
        session.updated_at = Utc::now();
        Ok(session.clone())
    }

    pub fn snapshot(&self) -> Snapshot {
        let networks = self
            .networks
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .values()
            .map(|n| Network::clone(n))
            .collect();
        let sessions = self
            .sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .values()
            .map(|c| lock(c).clone())
            .collect();
        Snapshot { networks, sessions }
    }

    /// Rebuilds a store, re-checking every session against its network.
    pub fn from_snapshot(snapshot: Snapshot) -> Result<Store, StoreError> {
        let store = Store::new();
        for net in snapshot.networks {
            let id = net.id().to_string();
            store.add_network(net).map_err(|_| StoreError::DuplicateNetwork(id))?;
        }
        {
            let mut sessions = store.sessions.write().unwrap_or_else(PoisonError::into_inner);
            for s in snapshot.sessions {
                let invalid = |reason: String| StoreError::Session {
                    session: s.id.clone(),
                    reason,
                };
                let net = store.network(&s.network_id).map_err(|e| invalid(e.body.message))?;
                s.scenario
                    .validate_for(&net, s.target.as_ref())
                    .map_err(|e| invalid(e.to_string()))?;
                sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(store)
    }

    /// Writes the snapshot to a sibling temp file, then renames it over `path`.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let text = serde_json::to_string_pretty(&self.snapshot())?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Loads `path`, or starts empty when it does not exist yet.
    pub fn load(path: &Path) -> Result<Store, StoreError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Store::from_snapshot(serde_json::from_str(&text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Store::new()),
            Err(e) => Err(e.into()),
        }
    }
}
