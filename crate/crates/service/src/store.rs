//! In-memory session store with optional JSON snapshots on disk.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use metaforge::pipeline::Session;
use metaforge::Metamodel;
use tokio::sync::{Mutex, RwLock};

/// One session. `state` serves reads; `update` serializes mutations so a
/// slow LLM call never blocks readers.
pub struct SessionSlot {
    pub update: Mutex<()>,
    pub state: RwLock<Session>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
}

pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<SessionSlot>>>,
    data_dir: Option<PathBuf>,
}

impl SessionStore {
    /// Loads every `<id>.json` snapshot found in `data_dir`.
    pub fn open(data_dir: Option<PathBuf>) -> Result<Self, StoreError> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &data_dir {
            let fail = |path: &Path, e: &dyn std::fmt::Display| StoreError::Snapshot {
                path: path.to_path_buf(),
                message: e.to_string(),
            };
            fs::create_dir_all(dir).map_err(|e| fail(dir, &e))?;
            for entry in fs::read_dir(dir).map_err(|e| fail(dir, &e))? {
                let path = entry.map_err(|e| fail(dir, &e))?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let text = fs::read_to_string(&path).map_err(|e| fail(&path, &e))?;
                let session: Session = serde_json::from_str(&text).map_err(|e| fail(&path, &e))?;
                sessions.insert(session.id.clone(), Arc::new(slot(session)));
            }
        }
        Ok(SessionStore {
            sessions: RwLock::new(sessions),
            data_dir,
        })
    }

    pub async fn get(&self, id: &str) -> Option<Arc<SessionSlot>> {
        self.sessions.read().await.get(id).cloned()
    }

    pub async fn create(&self, seed: Metamodel) -> Result<Arc<SessionSlot>, StoreError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.insert(Session::new(id, seed)).await
    }

    /// Returns the session with this id, creating it from `seed` if needed.
    pub async fn get_or_create(&self, id: &str, seed: Metamodel) -> Result<Arc<SessionSlot>, StoreError> {
        if let Some(slot) = self.get(id).await {
            return Ok(slot);
        }
        let mut sessions = self.sessions.write().await;
        if let Some(slot) = sessions.get(id) {
            return Ok(slot.clone());
        }
        let session = Session::new(id, seed);
        self.persist(&session)?;
        let slot = Arc::new(slot(session));
        sessions.insert(id.to_string(), slot.clone());
        Ok(slot)
    }

    async fn insert(&self, session: Session) -> Result<Arc<SessionSlot>, StoreError> {
        self.persist(&session)?;
        let id = session.id.clone();
        let slot = Arc::new(slot(session));
        self.sessions.write().await.insert(id, slot.clone());
        Ok(slot)
    }

    /// Writes a snapshot via a temporary file and rename, so a crash never
    /// leaves a truncated snapshot behind.
    pub fn persist(&self, session: &Session) -> Result<(), StoreError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        let path = dir.join(format!("{}.json", session.id));
        let tmp = dir.join(format!(".{}.json.tmp", session.id));
        let fail = |e: std::io::Error| StoreError::Snapshot {
            path: path.clone(),
            message: e.to_string(),
        };
        let json = serde_json::to_string_pretty(session).expect("sessions serialize");
        fs::write(&tmp, json).map_err(fail)?;
        fs::rename(&tmp, &path).map_err(fail)
    }
}

fn slot(session: Session) -> SessionSlot {
    SessionSlot {
        update: Mutex::new(()),
        state: RwLock::new(session),
    }
}
