use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use w2a_neural::{checkpoint, AskNet, CheckpointHeader};

use super::config::{hex_digest, CheckpointChoice, ExperimentConfig, PlannerKind};
use super::report::{EpisodeRow, EvalReport, Provenance};
use crate::error::{Error, Result};
use crate::mediator::{AskChoice, Mediator, PolicyKind};
use crate::options::NUM_OPTIONS;
use crate::planner::{LearnedPlanner, OraclePlanner, Planner, RemotePlanner};
use crate::training::{evaluate, run_episode, train_asker, train_selector, CurvePoint, Episode, LoopConfig};

pub const CURVES_HEADER: &str = "env,policy,train_seed,iteration,mean_interactions,mean_timesteps,success_rate";

/// `<dir>/checkpoints/<role>-seed<seed>-<best|final>.ckpt`
pub fn checkpoint_path(dir: &Path, role: &str, seed: u64, choice: CheckpointChoice) -> PathBuf {
    let tag = match choice {
        CheckpointChoice::Best => "best",
        CheckpointChoice::Final => "final",
    };
    dir.join("checkpoints").join(format!("{role}-seed{seed}-{tag}.ckpt"))
}

/// A loaded network, the training seed it came from and the file digest.
pub struct LoadedNet {
    pub train_seed: Option<u64>,
    pub net: AskNet,
    pub id: String,
}

pub fn load_net(path: &Path) -> Result<LoadedNet> {
    let bytes = fs::read(path).map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
    let (header, net) =
        checkpoint::read_from(&bytes[..]).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    Ok(LoadedNet {
        train_seed: header.meta.get("train_seed").and_then(|s| s.as_u64()),
        net,
        id: hex_digest(&bytes),
    })
}

/// A single checkpoint file, or one per training seed from a training
/// output directory.
pub fn load_nets(path: &Path, role: &str, cfg: &ExperimentConfig, choice: CheckpointChoice) -> Result<Vec<LoadedNet>> {
    if path.is_dir() {
        cfg.training_seeds
            .iter()
            .map(|&s| {
                let mut l = load_net(&checkpoint_path(path, role, s, choice))?;
                l.train_seed = Some(s);
                Ok(l)
            })
            .collect()
    } else {
        Ok(vec![load_net(path)?])
    }
}

fn save_net(path: &Path, net: &AskNet, role: &str, meta: serde_json::Value) -> Result<()> {
    let mut header = CheckpointHeader::for_net(net, role, NUM_OPTIONS);
    header.meta = meta;
    checkpoint::save(path, &header, net).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}

fn fixed_planner(cfg: &ExperimentConfig) -> Result<Box<dyn Planner>> {
    Ok(match cfg.planner.kind {
        PlannerKind::Oracle => Box::new(OraclePlanner),
        PlannerKind::Remote => Box::new(RemotePlanner::new(cfg.planner.remote.clone().with_env())),
        PlannerKind::Learned => unreachable!("learned planners are built per checkpoint"),
    })
}

fn required<'a>(p: &'a Option<PathBuf>, field: &str) -> Result<&'a PathBuf> {
    p.as_ref()
        .ok_or_else(|| Error::Config(format!("{field}: a checkpoint is required for this run")))
}

fn planner_name(k: PlannerKind) -> &'static str {
    match k {
        PlannerKind::Oracle => "oracle",
        PlannerKind::Remote => "remote",
        PlannerKind::Learned => "learned",
    }
}

/// Evaluate the configured policy (or `policy`, if given) on every test
/// seed: once per checkpoint for learned components, `random_repetitions`
/// times for the random policy, once otherwise.
pub fn run_eval(cfg: &ExperimentConfig, policy: Option<PolicyKind>) -> Result<EvalReport> {
    let policy = policy.unwrap_or(cfg.mediator.policy);
    let seeds = cfg.test_seeds();
    let lc = cfg.ppo.loop_config();
    let mut rows = vec![];
    let mut ids = vec![];
    let mut push = |eps: Vec<Episode>, train_seed: Option<u64>, rep: u64| {
        rows.extend(eps.iter().map(|e| EpisodeRow::new(policy.name(), train_seed, rep, e)));
    };
    if cfg.planner.kind == PlannerKind::Learned {
        if policy == PolicyKind::Learned {
            return Err(Error::Config("mediator.policy: cannot be learned together with a learned planner".into()));
        }
        let path = required(&cfg.planner.checkpoint, "planner.checkpoint")?;
        for l in load_nets(path, "selector", cfg, cfg.mediator.select)? {
            let mut planner = LearnedPlanner::new(l.net)?;
            ids.push(l.id);
            let reps = if policy == PolicyKind::Random { cfg.random_repetitions as u64 } else { 1 };
            for rep in 0..reps {
                push(evaluate(cfg.env_kind, policy, None, &mut planner, &seeds, rep, lc)?, l.train_seed, rep);
            }
        }
    } else {
        let mut planner = fixed_planner(cfg)?;
        match policy {
            PolicyKind::Learned => {
                let path = required(&cfg.mediator.checkpoint, "mediator.checkpoint")?;
                for l in load_nets(path, "asker", cfg, cfg.mediator.select)? {
                    ids.push(l.id);
                    push(evaluate(cfg.env_kind, policy, Some(&l.net), planner.as_mut(), &seeds, 0, lc)?, l.train_seed, 0);
                }
            }
            PolicyKind::Random => {
                for rep in 0..cfg.random_repetitions as u64 {
                    push(evaluate(cfg.env_kind, policy, None, planner.as_mut(), &seeds, rep, lc)?, None, rep);
                }
            }
            _ => push(evaluate(cfg.env_kind, policy, None, planner.as_mut(), &seeds, 0, lc)?, None, 0),
        }
    }
    Ok(EvalReport::new(
        cfg.env_kind,
        planner_name(cfg.planner.kind),
        rows,
        Provenance::new(cfg.hash(), ids),
    ))
}

/// `report.json` and `episodes.csv` under `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json())?;
    fs::write(dir.join("episodes.csv"), report.episodes_csv())?;
    Ok(())
}

pub fn curve_row(env: &str, policy: &str, train_seed: u64, p: &CurvePoint) -> String {
    format!(
        "{env},{policy},{train_seed},{},{:.4},{:.4},{:.4}",
        p.iteration, p.summary.mean_interactions, p.summary.mean_timesteps, p.summary.success_rate
    )
}

/// Train one network per training seed. Writes `curves.csv` (rows appended
/// as evaluations finish) and best/final checkpoints; returns the
/// checkpoint paths.
pub fn run_train(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let selector = cfg.planner.kind == PlannerKind::Learned;
    if selector && cfg.mediator.policy != PolicyKind::Never {
        return Err(Error::Config("mediator.policy: option-selector training runs with 'never'".into()));
    }
    if !selector && cfg.mediator.policy != PolicyKind::Learned {
        return Err(Error::Config(
            "mediator.policy: training needs 'learned' (or planner.kind 'learned' to train the option selector)".into(),
        ));
    }
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir.join("checkpoints"))?;
    let curves_path = dir.join("curves.csv");
    fs::write(&curves_path, format!("{CURVES_HEADER}\n"))?;
    let seeds = cfg.test_seeds();
    let env = cfg.env_kind.name();
    let policy = cfg.mediator.policy.name();
    let role = if selector { "selector" } else { "asker" };
    let mut written = vec![];
    for &ts in &cfg.training_seeds {
        let mut curves = OpenOptions::new().append(true).open(&curves_path)?;
        let mut io_err = None;
        let mut on_point = |p: &CurvePoint| {
            log::info!("{env} seed {ts} iteration {}: {:?}", p.iteration, p.summary);
            if let Err(e) = writeln!(curves, "{}", curve_row(env, policy, ts, p)) {
                io_err.get_or_insert(e);
            }
        };
        let run = if selector {
            train_selector(cfg.env_kind, &cfg.ppo, cfg.network.selector(), ts, &seeds, &mut on_point)?
        } else {
            let mut planner = fixed_planner(cfg)?;
            train_asker(cfg.env_kind, &cfg.ppo, cfg.network.asker(), ts, &seeds, planner.as_mut(), &mut on_point)?
        };
        if let Some(e) = io_err {
            return Err(e.into());
        }
        let meta = |iteration: Option<usize>| {
            json!({"train_seed": ts, "env_kind": env, "iteration": iteration, "config_hash": cfg.hash()})
        };
        let best = checkpoint_path(dir, role, ts, CheckpointChoice::Best);
        save_net(&best, &run.best_net, role, meta(run.best.map(|b| b.iteration)))?;
        let fin = checkpoint_path(dir, role, ts, CheckpointChoice::Final);
        save_net(&fin, &run.final_net, role, meta(Some(cfg.ppo.iterations)))?;
        written.extend([best, fin]);
    }
    Ok(written)
}

/// One traced episode for `seed`, as text.
pub fn run_render(cfg: &ExperimentConfig, seed: u64, policy: Option<PolicyKind>) -> Result<(Episode, String)> {
    let policy = policy.unwrap_or(cfg.mediator.policy);
    let lc = LoopConfig { trace: true, ..cfg.ppo.loop_config() };
    let first = |p: &Option<PathBuf>, field: &str, role: &str| -> Result<AskNet> {
        let path = required(p, field)?;
        Ok(load_nets(path, role, cfg, cfg.mediator.select)?.remove(0).net)
    };
    let mut planner: Box<dyn Planner> = if cfg.planner.kind == PlannerKind::Learned {
        Box::new(LearnedPlanner::new(first(&cfg.planner.checkpoint, "planner.checkpoint", "selector")?)?)
    } else {
        fixed_planner(cfg)?
    };
    let net = if policy == PolicyKind::Learned {
        Some(first(&cfg.mediator.checkpoint, "mediator.checkpoint", "asker")?)
    } else {
        None
    };
    let mut mediator = Mediator::new(policy, net, seed)?;
    let ep = run_episode(cfg.env_kind, seed, &mut mediator, planner.as_mut(), lc)?;
    let text = format_trace(&ep);
    Ok((ep, text))
}

pub fn format_trace(ep: &Episode) -> String {
    let mut out = format!("{} seed {}\n", ep.env_kind, ep.seed);
    for s in &ep.trace {
        writeln!(out, "\nt={}", s.t).unwrap();
        out.push_str(&s.frame);
        if !s.frame.ends_with('\n') {
            out.push('\n');
        }
        writeln!(out, "translation: {}", s.translation).unwrap();
        let decision = match s.decision {
            AskChoice::Ask => "ask",
            AskChoice::NotAsk => "not ask",
        };
        writeln!(out, "decision: {decision}").unwrap();
        for c in &s.calls {
            if c.forced {
                writeln!(out, "forced ask: plan exhausted").unwrap();
            }
            match &c.plan {
                Some(p) => writeln!(
                    out,
                    "planner: {:?} -> {p}{}",
                    c.response,
                    if c.penalized { " (same option)" } else { "" }
                ),
                None => writeln!(out, "planner: {:?} -> parse error, plan kept", c.response),
            }
            .unwrap();
        }
        writeln!(out, "option: {}", s.option.as_deref().unwrap_or("none")).unwrap();
        writeln!(out, "action: {}", s.action.name()).unwrap();
    }
    writeln!(
        out,
        "\nresult: {} after {} steps, {} interactions",
        if ep.success { "success" } else { "failure" },
        ep.timesteps,
        ep.interactions
    )
    .unwrap();
    out
}
