//! Live tracker sessions. Each session owns one tracker; steps on the same
//! session are serialized by its lock, distinct sessions run independently.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use cascadetrack_core::{TrackStatus, Tracker, TrackerConfig};
use uuid::Uuid;

use crate::api::SessionInfo;
use crate::error::ApiError;

#[derive(Debug)]
pub struct Session {
    pub tracker: Tracker,
    pub frames_processed: u64,
}

impl Session {
    pub fn info(&self, session_id: Uuid) -> SessionInfo {
        let tracks = self.tracker.tracks();
        SessionInfo {
            session_id,
            config: self.tracker.config().clone(),
            frames_processed: self.frames_processed,
            last_frame: self.tracker.last_frame(),
            live_tracks: tracks.len(),
            confirmed_tracks: tracks.iter().filter(|t| t.status == TrackStatus::Confirmed).count(),
            next_track_id: self.tracker.next_id(),
        }
    }
}

pub type SharedSession = Arc<Mutex<Session>>;

#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<Uuid, SharedSession>>,
}

impl SessionStore {
    pub fn create(&self, config: TrackerConfig) -> Result<(Uuid, TrackerConfig), ApiError> {
        let tracker = Tracker::new(config)?;
        let config = tracker.config().clone();
        let id = Uuid::new_v4();
        let session = Session {
            tracker,
            frames_processed: 0,
        };
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok((id, config))
    }

    pub fn get(&self, id: Uuid) -> Result<SharedSession, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }

    pub fn remove(&self, id: Uuid) -> Result<(), ApiError> {
        self.sessions
            .write()
            .expect("session map poisoned")
            .remove(&id)
            .map(|_| ())
            .ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn create_get_remove() {
        let store = SessionStore::default();
        assert!(store.is_empty());
        let (id, cfg) = store.create(TrackerConfig::default()).unwrap();
        assert_eq!(cfg, TrackerConfig::default());
        let info = store.get(id).unwrap().lock().unwrap().info(id);
        assert_eq!((info.frames_processed, info.last_frame, info.next_track_id), (0, None, 1));
        store.remove(id).unwrap();
        assert!(matches!(store.get(id), Err(ApiError::NotFound(_))));
        assert!(matches!(store.remove(id), Err(ApiError::NotFound(_))));
    }

    #[test]
    fn invalid_config_is_refused() {
        let store = SessionStore::default();
        let bad = TrackerConfig {
            max_age: 0,
            ..TrackerConfig::default()
        };
        assert!(matches!(store.create(bad), Err(ApiError::Validation(_))));
        assert!(store.is_empty());
    }
}
