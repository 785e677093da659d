use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use w2a_neural::{AskNet, Categorical};

use super::{Planner, PlannerRequest, PlannerResponse, PlannerSource};
use crate::encode::obs_and_diff;
use crate::error::{Error, Result};
use crate::gridworld::{Color, Observation};
use crate::options::{option_terminated, AgentView, OptionProgress, OptionSpec, Plan, TargetObject, NUM_OPTIONS};
use crate::translator::FactList;

/// Observation plus frame difference.
pub const SELECTOR_CHANNELS: usize = 8;

/// One option selection, with the task reward collected until the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorSample {
    pub input: Vec<f64>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// Attach a color to a vocabulary index: the door's color for doors and
/// for a key when a key of that color is known, otherwise the lowest known
/// color of that object (or the carried key).
pub fn ground_option(index: usize, facts: &FactList) -> OptionSpec {
    if index == 0 {
        return OptionSpec::explore();
    }
    let object = TargetObject::ALL[(index - 1) % 3];
    let door = facts.door().map(|d| d.color);
    let lowest = facts.find(object).next().map(|f| f.color);
    let color = match object {
        TargetObject::Key => door
            .filter(|c| facts.find(TargetObject::Key).any(|k| k.color == *c))
            .or(lowest)
            .or(facts.carrying),
        _ => lowest,
    };
    OptionSpec::from_index(index, color.unwrap_or(Color::Red)).expect("index below NUM_OPTIONS")
}

/// Options that can start and are not already done.
pub fn selector_mask(view: &AgentView, facts: &FactList) -> Vec<bool> {
    (0..NUM_OPTIONS)
        .map(|i| {
            let o = ground_option(i, facts);
            !option_terminated(&o, view, &OptionProgress::default()).terminated()
        })
        .collect()
}

pub fn selector_input(obs: &Observation, prev: &Observation, net: &AskNet) -> Result<Vec<f64>> {
    let cfg = net.config();
    obs_and_diff(obs, prev, cfg.width, cfg.height)
}

/// Policy-over-options learned with reinforcement learning. Picks a single
/// option per call.
pub struct LearnedPlanner {
    net: AskNet,
    rng: Option<ChaCha8Rng>,
    recording: bool,
    pub samples: Vec<SelectorSample>,
}

impl LearnedPlanner {
    pub fn new(net: AskNet) -> Result<Self> {
        let cfg = net.config();
        if cfg.in_channels != SELECTOR_CHANNELS || cfg.policy_outputs != NUM_OPTIONS {
            return Err(Error::Checkpoint(format!(
                "option selector needs {SELECTOR_CHANNELS} input channels and {NUM_OPTIONS} outputs, got {} and {}",
                cfg.in_channels, cfg.policy_outputs
            )));
        }
        Ok(Self {
            net,
            rng: None,
            recording: false,
            samples: vec![],
        })
    }

    /// Sample from the policy (and record samples) instead of taking argmax.
    pub fn sampling(mut self, seed: u64) -> Self {
        self.rng = Some(ChaCha8Rng::seed_from_u64(seed));
        self.recording = true;
        self
    }

    pub fn net(&self) -> &AskNet {
        &self.net
    }

    pub fn into_samples(self) -> Vec<SelectorSample> {
        self.samples
    }
}

impl Planner for LearnedPlanner {
    fn plan(&mut self, req: &PlannerRequest) -> Result<PlannerResponse> {
        let mask = selector_mask(&req.view, req.facts);
        let option = if mask.iter().any(|m| *m) {
            let input = selector_input(req.view.obs, req.prev_obs, &self.net)?;
            let (logits, value) = self.net.infer(input.clone(), 1)?;
            let dist = Categorical::masked(&logits, &mask);
            let action = match &mut self.rng {
                Some(rng) => dist.sample(rng),
                None => dist.argmax(),
            };
            if self.recording {
                self.samples.push(SelectorSample {
                    input,
                    mask,
                    action,
                    log_prob: dist.log_prob(action),
                    value: value[0],
                    reward: 0.0,
                    done: false,
                });
            }
            ground_option(action, req.facts)
        } else {
            // nothing can start; explore is re-issued and terminates at once
            OptionSpec::explore()
        };
        let plan = Plan::new(vec![option]);
        Ok(PlannerResponse {
            raw_text: plan.text(),
            plan,
            source: PlannerSource::Learned,
        })
    }

    fn on_step(&mut self, reward: f64, done: bool) {
        if let Some(last) = self.samples.last_mut() {
            last.reward += reward;
            last.done |= done;
        }
    }
}
