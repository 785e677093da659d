use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use w2a_neural::{AskNet, NetConfig};

use super::{compute_gae, normalize, run_episode, Batch, Episode, Head, Learner, LoopConfig, PpoConfig, PpoSample, PpoStats};
use crate::error::{Error, Result};
use crate::gridworld::EnvKind;
use crate::mediator::{Mediator, PolicyKind};
use crate::planner::{LearnedPlanner, Planner, SELECTOR_CHANNELS};
use crate::options::NUM_OPTIONS;

/// Training environments are drawn from `[0, TRAIN_SEED_LIMIT)`.
pub const TRAIN_SEED_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub mean_interactions: f64,
    pub mean_timesteps: f64,
    pub success_rate: f64,
    pub mean_return: f64,
    pub mean_shaped_return: f64,
}

pub fn summarize(episodes: &[Episode]) -> Summary {
    let n = episodes.len().max(1) as f64;
    Summary {
        episodes: episodes.len(),
        mean_interactions: episodes.iter().map(|e| e.interactions as f64).sum::<f64>() / n,
        mean_timesteps: episodes.iter().map(|e| e.timesteps as f64).sum::<f64>() / n,
        success_rate: episodes.iter().filter(|e| e.success).count() as f64 / n,
        mean_return: episodes.iter().map(|e| e.task_return).sum::<f64>() / n,
        mean_shaped_return: episodes.iter().map(|e| e.shaped_return).sum::<f64>() / n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    #[serde(flatten)]
    pub summary: Summary,
    pub stats: PpoStats,
}

pub struct TrainRun {
    pub final_net: AskNet,
    pub best_net: AskNet,
    pub best: Option<CurvePoint>,
    pub curve: Vec<CurvePoint>,
}

/// Argmax evaluation of one asking policy on every seed, each episode
/// with its own mediator rng so results do not depend on seed order.
pub fn evaluate(
    env_kind: EnvKind,
    policy: PolicyKind,
    net: Option<&AskNet>,
    planner: &mut dyn Planner,
    seeds: &[u64],
    repetition: u64,
    cfg: LoopConfig,
) -> Result<Vec<Episode>> {
    seeds
        .iter()
        .map(|&seed| {
            let mseed = seed ^ repetition.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut m = Mediator::new(policy, net.cloned(), mseed)?;
            run_episode(env_kind, seed, &mut m, planner, cfg)
        })
        .collect()
}

fn training_seed(rng: &mut ChaCha8Rng, held_out: &[u64]) -> Result<u64> {
    for _ in 0..1000 {
        let s = rng.gen_range(0..TRAIN_SEED_LIMIT);
        if !held_out.contains(&s) {
            return Ok(s);
        }
    }
    Err(Error::Training("could not draw a training seed outside the held-out set".into()))
}

/// Higher success first, then higher shaped return.
fn better(a: &Summary, b: &Summary) -> bool {
    a.success_rate > b.success_rate
        || (a.success_rate == b.success_rate && a.mean_shaped_return > b.mean_shaped_return)
}

struct Tracker<'a> {
    curve: Vec<CurvePoint>,
    best: Option<(CurvePoint, AskNet)>,
    on_point: &'a mut dyn FnMut(&CurvePoint),
}

impl Tracker<'_> {
    fn record(&mut self, point: CurvePoint, net: &AskNet) {
        (self.on_point)(&point);
        if self.best.as_ref().is_none_or(|(b, _)| better(&point.summary, &b.summary)) {
            self.best = Some((point, net.clone()));
        }
        self.curve.push(point);
    }

    fn finish(self, final_net: AskNet) -> TrainRun {
        let (best, best_net) = match self.best {
            Some((p, n)) => (Some(p), n),
            None => (None, final_net.clone()),
        };
        TrainRun {
            final_net,
            best_net,
            best,
            curve: self.curve,
        }
    }
}

fn due(it: usize, cfg: &PpoConfig) -> bool {
    it == cfg.iterations || (cfg.eval_interval > 0 && it.is_multiple_of(cfg.eval_interval))
}

/// PPO on the asking policy. Evaluates on `held_out` (argmax) at iteration
/// 0 and then per `eval_interval`; the best evaluated snapshot is kept.
pub fn train_asker(
    env_kind: EnvKind,
    cfg: &PpoConfig,
    net_config: NetConfig,
    train_seed: u64,
    held_out: &[u64],
    planner: &mut dyn Planner,
    on_point: &mut dyn FnMut(&CurvePoint),
) -> Result<TrainRun> {
    cfg.validate()?;
    if net_config.policy_outputs != 2 * NUM_OPTIONS {
        return Err(Error::Config(format!("asking network needs {} outputs", 2 * NUM_OPTIONS)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(train_seed);
    let mut learner = Learner::new(AskNet::new(net_config, &mut rng), cfg);
    let loop_cfg = cfg.loop_config();
    let mut tracker = Tracker {
        curve: vec![],
        best: None,
        on_point,
    };
    let eval = |net: &AskNet, planner: &mut dyn Planner| -> Result<Summary> {
        Ok(summarize(&evaluate(env_kind, PolicyKind::Learned, Some(net), planner, held_out, 0, loop_cfg)?))
    };
    if cfg.eval_interval > 0 {
        let summary = eval(&learner.net, planner)?;
        tracker.record(CurvePoint { iteration: 0, summary, stats: PpoStats::default() }, &learner.net);
    }
    for it in 1..=cfg.iterations {
        let mut mediator = Mediator::new(PolicyKind::Learned, Some(learner.net.clone()), rng.gen())?.sampling(true);
        let mut batch = Batch { version: learner.version, samples: vec![] };
        let (mut rewards, mut values, mut dones) = (vec![], vec![], vec![]);
        while batch.samples.len() < cfg.steps_per_iteration {
            let seed = training_seed(&mut rng, held_out)?;
            assert!(!held_out.contains(&seed), "training seed {seed} is held out");
            let ep = run_episode(env_kind, seed, &mut mediator, planner, loop_cfg)?;
            for r in ep.records {
                rewards.push(r.shaped_reward);
                values.push(r.value);
                dones.push(r.done);
                batch.samples.push(PpoSample {
                    input: r.input,
                    head: Head::Pair(r.option_index),
                    action: r.action,
                    old_log_prob: r.log_prob,
                    advantage: 0.0,
                    ret: 0.0,
                });
            }
        }
        fill_advantages(&mut batch.samples, &rewards, &values, &dones, cfg);
        let stats = learner.update(&batch, cfg, &mut rng)?;
        log::debug!("iteration {it}: {stats:?}");
        if due(it, cfg) {
            let summary = eval(&learner.net, planner)?;
            tracker.record(CurvePoint { iteration: it, summary, stats }, &learner.net);
        }
    }
    Ok(tracker.finish(learner.net))
}

fn fill_advantages(samples: &mut [PpoSample], rewards: &[f64], values: &[f64], dones: &[bool], cfg: &PpoConfig) {
    let (mut adv, ret) = compute_gae(rewards, values, dones, 0.0, cfg.gamma, cfg.gae_lambda);
    normalize(&mut adv);
    for ((s, a), r) in samples.iter_mut().zip(adv).zip(ret) {
        s.advantage = a;
        s.ret = r;
    }
}

/// Selector network shape: observation and frame difference in, one logit
/// per option out.
pub fn selector_net_config(conv: [usize; 3], hidden: [usize; 2]) -> NetConfig {
    let mut c = NetConfig::new(crate::gridworld::GRID_MAX, crate::gridworld::GRID_MAX, NUM_OPTIONS)
        .with_widths(conv, hidden);
    c.in_channels = SELECTOR_CHANNELS;
    c
}

fn selector_episodes(
    env_kind: EnvKind,
    net: &AskNet,
    seeds: &[u64],
    loop_cfg: LoopConfig,
) -> Result<Vec<Episode>> {
    seeds
        .iter()
        .map(|&seed| {
            let mut planner = LearnedPlanner::new(net.clone())?;
            let mut m = Mediator::new(PolicyKind::Never, None, 0)?;
            run_episode(env_kind, seed, &mut m, &mut planner, loop_cfg)
        })
        .collect()
}

/// PPO on the option selector, run under a mediator that never asks: the
/// selector is consulted only when the running option terminates. One
/// sample per selection; its reward is the task reward until the next.
pub fn train_selector(
    env_kind: EnvKind,
    cfg: &PpoConfig,
    net_config: NetConfig,
    train_seed: u64,
    held_out: &[u64],
    on_point: &mut dyn FnMut(&CurvePoint),
) -> Result<TrainRun> {
    cfg.validate()?;
    if net_config.in_channels != SELECTOR_CHANNELS || net_config.policy_outputs != NUM_OPTIONS {
        return Err(Error::Config("selector network must be selector_net_config-shaped".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(train_seed);
    let mut learner = Learner::new(AskNet::new(net_config, &mut rng), cfg);
    let loop_cfg = LoopConfig { penalty: 0.0, ..cfg.loop_config() };
    let mut tracker = Tracker {
        curve: vec![],
        best: None,
        on_point,
    };
    if cfg.eval_interval > 0 {
        let summary = summarize(&selector_episodes(env_kind, &learner.net, held_out, loop_cfg)?);
        tracker.record(CurvePoint { iteration: 0, summary, stats: PpoStats::default() }, &learner.net);
    }
    for it in 1..=cfg.iterations {
        let mut batch = Batch { version: learner.version, samples: vec![] };
        let (mut rewards, mut values, mut dones) = (vec![], vec![], vec![]);
        while batch.samples.len() < cfg.steps_per_iteration {
            let seed = training_seed(&mut rng, held_out)?;
            let mut planner = LearnedPlanner::new(learner.net.clone())?.sampling(rng.gen());
            let mut m = Mediator::new(PolicyKind::Never, None, 0)?;
            run_episode(env_kind, seed, &mut m, &mut planner, loop_cfg)?;
            let mut samples = planner.into_samples();
            if let Some(last) = samples.last_mut() {
                last.done = true;
            }
            for s in samples {
                rewards.push(s.reward);
                values.push(s.value);
                dones.push(s.done);
                batch.samples.push(PpoSample {
                    input: s.input,
                    head: Head::Masked(s.mask),
                    action: s.action,
                    old_log_prob: s.log_prob,
                    advantage: 0.0,
                    ret: 0.0,
                });
            }
        }
        fill_advantages(&mut batch.samples, &rewards, &values, &dones, cfg);
        let stats = learner.update(&batch, cfg, &mut rng)?;
        if due(it, cfg) {
            let summary = summarize(&selector_episodes(env_kind, &learner.net, held_out, loop_cfg)?);
            tracker.record(CurvePoint { iteration: it, summary, stats }, &learner.net);
        }
    }
    Ok(tracker.finish(learner.net))
}

/// Argmax evaluation of a trained selector (mediator never asks).
pub fn evaluate_selector(env_kind: EnvKind, net: &AskNet, seeds: &[u64], cfg: LoopConfig) -> Result<Vec<Episode>> {
    selector_episodes(env_kind, net, seeds, cfg)
}
