//! The control loop: mediator → planner → option → environment, one
//! primitive action per timestep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{render_ascii, reset, Action, EnvKind, Observation, WorldState};
use crate::mediator::{option_index, AskChoice, Mediator};
use crate::options::{option_action, option_terminated, AgentView, OptionProgress, OptionSpec, Plan};
use crate::planner::{Planner, PlannerRequest};
use crate::translator::{extract_facts, render_text};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Same-plan penalty λ.
    pub penalty: f64,
    /// Compare whole option lists instead of active options.
    pub compare_full_plan: bool,
    /// Keep a per-step text trace.
    pub trace: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            penalty: 0.05,
            compare_full_plan: false,
            trace: false,
        }
    }
}

/// One learned asking decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskRecord {
    pub input: Vec<f64>,
    pub option_index: usize,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    pub shaped_reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerCall {
    pub forced: bool,
    pub response: String,
    /// Parsed plan, `None` on a parse error.
    pub plan: Option<String>,
    pub penalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub frame: String,
    pub translation: String,
    /// Option running when the mediator decided, and whether it had
    /// terminated by then.
    pub active_before: Option<String>,
    pub terminated_before: bool,
    pub decision: AskChoice,
    pub calls: Vec<PlannerCall>,
    pub option: Option<String>,
    pub action: Action,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub env_kind: EnvKind,
    pub seed: u64,
    pub success: bool,
    pub interactions: usize,
    pub timesteps: usize,
    pub ask_decisions: usize,
    pub forced_asks: usize,
    pub penalized: usize,
    pub parse_errors: usize,
    pub task_return: f64,
    /// Task return minus same-plan penalties.
    pub shaped_return: f64,
    pub records: Vec<AskRecord>,
    pub trace: Vec<TraceStep>,
}

struct Run<'a> {
    planner: &'a mut dyn Planner,
    cfg: LoopConfig,
    plan: Plan,
    progress: OptionProgress,
    ep: Episode,
}

impl Run<'_> {
    fn consult(
        &mut self,
        state: &WorldState,
        obs: &Observation,
        prev_obs: &Observation,
        forced: bool,
        calls: &mut Vec<PlannerCall>,
    ) -> Result<usize> {
        self.ep.interactions += 1;
        if forced {
            self.ep.forced_asks += 1;
        }
        let facts = extract_facts(obs, state.carried);
        let text = render_text(&facts);
        let req = PlannerRequest {
            env_kind: state.env_kind,
            facts: &facts,
            facts_text: &text,
            view: AgentView::from_state(state, obs),
            prev_obs,
        };
        match self.planner.plan(&req) {
            Ok(resp) => {
                let same = if self.cfg.compare_full_plan {
                    resp.plan.options == self.plan.options
                } else {
                    resp.plan.current().is_some()
                        && resp.plan.current() == self.plan.current().or(self.plan.options.last())
                };
                let keep = self.plan.current().is_some()
                    && resp.plan.current() == self.plan.current()
                    && !self.progress.terminated();
                if !keep {
                    self.progress = OptionProgress::default();
                }
                if self.cfg.trace {
                    calls.push(PlannerCall {
                        forced,
                        response: resp.raw_text.clone(),
                        plan: Some(resp.plan.text()),
                        penalized: same,
                    });
                }
                self.plan = resp.plan;
                self.ep.penalized += same as usize;
                Ok(same as usize)
            }
            Err(Error::Parse(raw)) => {
                self.ep.parse_errors += 1;
                if self.cfg.trace {
                    calls.push(PlannerCall {
                        forced,
                        response: raw,
                        plan: None,
                        penalized: false,
                    });
                }
                Ok(0)
            }
            Err(e) => Err(e),
        }
    }

    /// Skip terminated options; an exhausted plan triggers one forced ask
    /// unless the planner was already called this step.
    fn active(
        &mut self,
        state: &WorldState,
        obs: &Observation,
        prev_obs: &Observation,
        mut called: bool,
        calls: &mut Vec<PlannerCall>,
    ) -> Result<(Option<OptionSpec>, usize)> {
        let mut penalties = 0;
        let view = AgentView::from_state(state, obs);
        loop {
            let Some(o) = self.plan.current().cloned() else {
                if called {
                    return Ok((None, penalties));
                }
                called = true;
                penalties += self.consult(state, obs, prev_obs, true, calls)?;
                continue;
            };
            self.progress = option_terminated(&o, &view, &self.progress);
            if !self.progress.terminated() {
                return Ok((Some(o), penalties));
            }
            self.plan.advance();
            self.progress = OptionProgress::default();
        }
    }
}

/// Run one episode from `state` (whose current observation is `obs`).
pub fn run_episode_from(
    mut state: WorldState,
    mut obs: Observation,
    mediator: &mut Mediator,
    planner: &mut dyn Planner,
    cfg: LoopConfig,
) -> Result<Episode> {
    let mut run = Run {
        planner,
        cfg,
        plan: Plan::new(vec![]),
        progress: OptionProgress::default(),
        ep: Episode {
            env_kind: state.env_kind,
            seed: state.seed,
            success: false,
            interactions: 0,
            timesteps: 0,
            ask_decisions: 0,
            forced_asks: 0,
            penalized: 0,
            parse_errors: 0,
            task_return: 0.0,
            shaped_return: 0.0,
            records: vec![],
            trace: vec![],
        },
    };
    let mut prev_obs = obs.clone();
    while !state.done {
        let view = AgentView::from_state(&state, &obs);
        if let Some(o) = run.plan.current() {
            run.progress = option_terminated(o, &view, &run.progress);
        }
        let terminated = run.plan.current().is_none() || run.progress.terminated();
        let k = run.plan.current().map_or(0, option_index);
        let active_before = run.plan.current().map(|o| o.text());
        let decision = mediator.decide(&prev_obs, &obs, k, terminated)?;
        let input = mediator.take_input();

        let mut calls = vec![];
        let mut penalties = 0;
        let asked = decision.choice == AskChoice::Ask;
        if asked {
            run.ep.ask_decisions += 1;
            penalties += run.consult(&state, &obs, &prev_obs, false, &mut calls)?;
        }
        let (option, p) = run.active(&state, &obs, &prev_obs, asked, &mut calls)?;
        penalties += p;

        let view = AgentView::from_state(&state, &obs);
        let action = match &option {
            Some(o) => option_action(o, &view, &mut run.progress),
            None => Action::TurnLeft,
        };
        let (frame, translation) = if cfg.trace {
            (render_ascii(&state), render_text(&extract_facts(&obs, state.carried)))
        } else {
            Default::default()
        };
        let result = state.step(action)?;
        run.planner.on_step(result.reward, result.done);
        run.ep.task_return += result.reward;
        let shaped = shaped_reward(result.reward, penalties > 0, penalties > 0, cfg.penalty);
        run.ep.shaped_return += shaped;

        if let (Some(input), Some(lp), Some(v)) = (input, decision.log_prob, decision.value_estimate) {
            run.ep.records.push(AskRecord {
                input,
                option_index: k,
                action: decision.choice.action(),
                log_prob: lp,
                value: v,
                shaped_reward: shaped,
                done: result.done,
            });
        }
        if cfg.trace {
            run.ep.trace.push(TraceStep {
                t: state.step_count - 1,
                frame,
                translation,
                active_before,
                terminated_before: terminated,
                decision: decision.choice,
                calls,
                option: option.map(|o| o.text()),
                action,
                reward: result.reward,
            });
        }
        prev_obs = std::mem::replace(&mut obs, result.observation);
    }
    run.ep.success = state.success;
    run.ep.timesteps = state.step_count;
    Ok(run.ep)
}

pub fn run_episode(
    env_kind: EnvKind,
    seed: u64,
    mediator: &mut Mediator,
    planner: &mut dyn Planner,
    cfg: LoopConfig,
) -> Result<Episode> {
    let (state, obs) = reset(env_kind, seed);
    run_episode_from(state, obs, mediator, planner, cfg)
}

/// Task reward, minus λ when an ask came back with the option already running.
pub fn shaped_reward(task_reward: f64, asked: bool, same_option: bool, penalty: f64) -> f64 {
    if asked && same_option {
        task_reward - penalty
    } else {
        task_reward
    }
}
