//! Policy-over-options: turn the current facts into a plan.

mod learned;
mod oracle;
mod parse;
mod prompt;
mod remote;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gridworld::{EnvKind, Observation};
use crate::options::{AgentView, Plan};
use crate::translator::FactList;

pub use learned::{ground_option, selector_input, selector_mask, LearnedPlanner, SelectorSample, SELECTOR_CHANNELS};
pub use oracle::{oracle_plan, OraclePlanner};
pub use parse::{parse_plan, MAX_PLAN_LEN};
pub use prompt::{build_prompt, PromptParts, PromptStyle, Template, FORMAT_DIRECTIVE};
pub use remote::{RemoteConfig, RemotePlanner, ResponseCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerSource {
    Oracle,
    Remote,
    Learned,
    Scripted,
}

/// Everything a planner may look at when asked.
#[derive(Debug, Clone, Copy)]
pub struct PlannerRequest<'a> {
    pub env_kind: EnvKind,
    pub facts: &'a FactList,
    pub facts_text: &'a str,
    pub view: AgentView<'a>,
    pub prev_obs: &'a Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerResponse {
    pub plan: Plan,
    pub raw_text: String,
    pub source: PlannerSource,
}

pub trait Planner: Send {
    fn plan(&mut self, req: &PlannerRequest) -> Result<PlannerResponse>;

    /// Called after every environment step with the task reward.
    fn on_step(&mut self, _reward: f64, _done: bool) {}
}

/// Test double: answers with the first rule whose needle occurs in the
/// facts text, parsed like a remote completion.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPlanner {
    pub rules: Vec<(String, String)>,
    pub default: String,
}

impl ScriptedPlanner {
    pub fn new(rules: Vec<(String, String)>, default: impl Into<String>) -> Self {
        Self {
            rules,
            default: default.into(),
        }
    }
}

impl Planner for ScriptedPlanner {
    fn plan(&mut self, req: &PlannerRequest) -> Result<PlannerResponse> {
        let raw = self
            .rules
            .iter()
            .find(|(needle, _)| req.facts_text.contains(needle.as_str()))
            .map_or(&self.default, |(_, reply)| reply)
            .clone();
        Ok(PlannerResponse {
            plan: parse_plan(&raw)?,
            raw_text: raw,
            source: PlannerSource::Scripted,
        })
    }
}

impl<P: Planner + ?Sized> Planner for Box<P> {
    fn plan(&mut self, req: &PlannerRequest) -> Result<PlannerResponse> {
        (**self).plan(req)
    }

    fn on_step(&mut self, reward: f64, done: bool) {
        (**self).on_step(reward, done)
    }
}
