use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::session::Session;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("snapshot I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot restore snapshot: {0}")]
    RestoreFailed(String),
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    sessions: Vec<Session>,
}

/// All live sessions. Reads of the map run concurrently; each session is
/// behind its own lock so operations on one session are serialized.
#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, session: Session) -> Arc<Mutex<Session>> {
        let id = session.id.clone();
        let handle = Arc::new(Mutex::new(session));
        self.sessions.write().unwrap().insert(id, handle.clone());
        handle
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    pub fn remove(&self, id: &str) -> bool {
        self.sessions.write().unwrap().remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copies of all sessions, ordered by id.
    pub fn sessions(&self) -> Vec<Session> {
        let map = self.sessions.read().unwrap();
        map.values().map(|s| s.lock().unwrap().clone()).collect()
    }

    pub fn snapshot_text(&self) -> String {
        let file = SnapshotFile {
            sessions: self.sessions(),
        };
        serde_json::to_string_pretty(&file).expect("sessions serialize") + "\n"
    }

    /// Writes every session to `path`, replacing it atomically.
    pub fn snapshot(&self, path: &Path) -> Result<usize, StoreError> {
        let text = self.snapshot_text();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(self.len())
    }

    /// Replaces the store's contents with the sessions in `text`. On any
    /// error the store is left as it was.
    pub fn restore_text(&self, text: &str) -> Result<usize, StoreError> {
        let file: SnapshotFile = serde_json::from_str(text).map_err(|e| StoreError::RestoreFailed(e.to_string()))?;
        let mut map = BTreeMap::new();
        for s in file.sessions {
            if map.contains_key(&s.id) {
                return Err(StoreError::RestoreFailed(format!("duplicate session `{}`", s.id)));
            }
            map.insert(s.id.clone(), Arc::new(Mutex::new(s)));
        }
        let n = map.len();
        *self.sessions.write().unwrap() = map;
        Ok(n)
    }

    pub fn restore(&self, path: &Path) -> Result<usize, StoreError> {
        let text = std::fs::read_to_string(path)?;
        self.restore_text(&text)
    }
}
