use serde::{Deserialize, Serialize};

use super::WorldState;
use crate::error::{Error, Result};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Versioned JSON document holding a full environment state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub state: WorldState,
}

impl Snapshot {
    pub fn new(state: &WorldState) -> Self {
        Self {
            version: SNAPSHOT_VERSION,
            state: state.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Snapshot =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("snapshot: {e}")))?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Config(format!(
                "snapshot version {} is not supported",
                snap.version
            )));
        }
        let s = &snap.state;
        if s.grid.len() != s.width * s.height || s.explored.len() != s.grid.len() {
            return Err(Error::Config("snapshot grid size does not match width×height".into()));
        }
        Ok(snap)
    }
}
