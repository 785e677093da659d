//! Control loop, advantage estimation and PPO for the asking policy (and
//! for the learned option selector).

mod episode;
mod gae;
mod ppo;
mod train;

pub use episode::{
    run_episode, run_episode_from, shaped_reward, AskRecord, Episode, LoopConfig, PlannerCall, TraceStep,
};
pub use gae::{compute_gae, gae_reference, normalize};
pub use ppo::{ppo_update, Batch, Head, Learner, PpoSample, PpoStats};
pub use train::{
    evaluate, evaluate_selector, selector_net_config, summarize, train_asker, train_selector, CurvePoint, Summary,
    TrainRun, TRAIN_SEED_LIMIT,
};

use serde::{Deserialize, Serialize};
use w2a_neural::AdamConfig;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub lr: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Same-plan penalty λ.
    pub penalty: f64,
    pub iterations: usize,
    pub steps_per_iteration: usize,
    /// Evaluate on the held-out seeds every this many iterations (0: only
    /// after the last).
    pub eval_interval: usize,
    pub compare_full_plan: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            epochs: 4,
            minibatch_size: 64,
            lr: 3e-4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            penalty: 0.05,
            iterations: 500,
            steps_per_iteration: 512,
            eval_interval: 1,
            compare_full_plan: false,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, why: &str| Err(Error::Config(format!("ppo.{f}: {why}")));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", "must be in (0, 1]");
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return bad("gae_lambda", "must be in (0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip", "must be positive");
        }
        if !(self.penalty >= 0.0) {
            return bad("penalty", "must be non-negative");
        }
        if !(self.lr > 0.0) {
            return bad("lr", "must be positive");
        }
        if self.epochs == 0 || self.minibatch_size == 0 || self.steps_per_iteration == 0 {
            return bad("epochs/minibatch_size/steps_per_iteration", "must be positive");
        }
        if !self.value_coef.is_finite() || !self.entropy_coef.is_finite() {
            return bad("value_coef/entropy_coef", "must be finite");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            ..AdamConfig::default()
        }
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            penalty: self.penalty,
            compare_full_plan: self.compare_full_plan,
            trace: false,
        }
    }
}

#[cfg(test)]
mod tests;
