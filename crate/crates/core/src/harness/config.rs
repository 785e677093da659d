use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use w2a_neural::NetConfig;

use super::test_seeds;
use crate::error::{Error, Result};
use crate::gridworld::EnvKind;
use crate::mediator::{ask_net_config, PolicyKind};
use crate::planner::RemoteConfig;
use crate::training::{selector_net_config, PpoConfig, TRAIN_SEED_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Oracle,
    Remote,
    Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointChoice {
    Best,
    #[default]
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediatorSection {
    pub policy: PolicyKind,
    /// A checkpoint file, or a training output directory holding one
    /// checkpoint per training seed.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default)]
    pub select: CheckpointChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSection {
    pub kind: PlannerKind,
    #[serde(default)]
    pub remote: RemoteConfig,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub conv: [usize; 3],
    pub hidden: [usize; 2],
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            conv: [16, 32, 32],
            hidden: [128, 64],
        }
    }
}

impl NetworkSection {
    pub fn asker(&self) -> NetConfig {
        ask_net_config(self.conv, self.hidden)
    }

    pub fn selector(&self) -> NetConfig {
        selector_net_config(self.conv, self.hidden)
    }
}

fn default_training_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}

fn default_repetitions() -> usize {
    5
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env_kind: EnvKind,
    pub mediator: MediatorSection,
    pub planner: PlannerSection,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default = "default_training_seeds")]
    pub training_seeds: Vec<u64>,
    /// Defaults to the shipped held-out seeds for `env_kind`.
    #[serde(default)]
    pub test_seeds: Option<Vec<u64>>,
    #[serde(default = "default_repetitions")]
    pub random_repetitions: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse and validate; errors name the offending field (and line).
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn minimal(env_kind: EnvKind, policy: PolicyKind, planner: PlannerKind) -> Self {
        Self {
            env_kind,
            mediator: MediatorSection {
                policy,
                checkpoint: None,
                select: CheckpointChoice::Final,
            },
            planner: PlannerSection {
                kind: planner,
                remote: RemoteConfig::default(),
                checkpoint: None,
            },
            ppo: PpoConfig::default(),
            network: NetworkSection::default(),
            training_seeds: default_training_seeds(),
            test_seeds: None,
            random_repetitions: default_repetitions(),
            output_dir: default_output(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ppo.validate()?;
        let tests = self.test_seeds();
        if tests.is_empty() {
            return Err(Error::Config("test_seeds: must not be empty".into()));
        }
        if self.training_seeds.is_empty() {
            return Err(Error::Config("training_seeds: must not be empty".into()));
        }
        if let Some(s) = self.training_seeds.iter().find(|s| tests.contains(s)) {
            return Err(Error::Config(format!("training_seeds: {s} is also a test seed")));
        }
        if tests.iter().any(|s| *s < TRAIN_SEED_LIMIT) {
            return Err(Error::Config(format!(
                "test_seeds: must be ≥ {TRAIN_SEED_LIMIT}, the range below is used for training episodes"
            )));
        }
        if self.random_repetitions == 0 {
            return Err(Error::Config("random_repetitions: must be positive".into()));
        }
        if self.network.conv.contains(&0) || self.network.hidden.contains(&0) {
            return Err(Error::Config("network: widths must be positive".into()));
        }
        if self.planner.kind == PlannerKind::Learned && self.mediator.policy == PolicyKind::Learned {
            return Err(Error::Config(
                "planner.kind: a learned planner is paired with a non-learned mediator policy".into(),
            ));
        }
        Ok(())
    }

    pub fn test_seeds(&self) -> Vec<u64> {
        self.test_seeds.clone().unwrap_or_else(|| test_seeds(self.env_kind).to_vec())
    }

    /// sha256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex_digest(canonical.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
