use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::EnvKind;
use crate::training::Episode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub policy: String,
    /// Training seed of the evaluated checkpoint (learned runs).
    pub train_seed: Option<u64>,
    pub repetition: u64,
    pub env_seed: u64,
    pub success: bool,
    pub interactions: usize,
    pub timesteps: usize,
    pub task_return: f64,
}

impl EpisodeRow {
    pub fn new(policy: &str, train_seed: Option<u64>, repetition: u64, ep: &Episode) -> Self {
        Self {
            policy: policy.to_string(),
            train_seed,
            repetition,
            env_seed: ep.seed,
            success: ep.success,
            interactions: ep.interactions,
            timesteps: ep.timesteps,
            task_return: ep.task_return,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyAggregate {
    pub policy: String,
    pub episodes: usize,
    pub mean_interactions: f64,
    pub mean_timesteps: f64,
    pub success_rate: f64,
}

impl PolicyAggregate {
    pub fn from_rows(policy: &str, rows: &[EpisodeRow]) -> Self {
        let mine: Vec<&EpisodeRow> = rows.iter().filter(|r| r.policy == policy).collect();
        let n = mine.len().max(1) as f64;
        Self {
            policy: policy.to_string(),
            episodes: mine.len(),
            mean_interactions: mine.iter().map(|r| r.interactions as f64).sum::<f64>() / n,
            mean_timesteps: mine.iter().map(|r| r.timesteps as f64).sum::<f64>() / n,
            success_rate: mine.iter().filter(|r| r.success).count() as f64 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    /// sha256 of each checkpoint file used, in evaluation order.
    pub checkpoint_ids: Vec<String>,
    pub commit: String,
    pub version: String,
}

impl Provenance {
    pub fn new(config_hash: String, checkpoint_ids: Vec<String>) -> Self {
        Self {
            config_hash,
            checkpoint_ids,
            commit: std::env::var("W2A_COMMIT").unwrap_or_else(|_| "unknown".into()),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub env_kind: EnvKind,
    pub planner: String,
    pub aggregates: Vec<PolicyAggregate>,
    pub episodes: Vec<EpisodeRow>,
    pub provenance: Provenance,
}

impl EvalReport {
    pub fn new(env_kind: EnvKind, planner: &str, episodes: Vec<EpisodeRow>, provenance: Provenance) -> Self {
        let mut policies: Vec<&str> = vec![];
        for r in &episodes {
            if !policies.contains(&r.policy.as_str()) {
                policies.push(&r.policy);
            }
        }
        let aggregates = policies.iter().map(|p| PolicyAggregate::from_rows(p, &episodes)).collect();
        Self {
            env_kind,
            planner: planner.to_string(),
            aggregates,
            episodes,
            provenance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("eval report: {e}")))
    }

    pub fn episodes_csv(&self) -> String {
        let mut out = String::from("env,policy,train_seed,repetition,env_seed,success,interactions,timesteps,task_return\n");
        for r in &self.episodes {
            let ts = r.train_seed.map(|s| s.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{ts},{},{},{},{},{},{:.6}",
                self.env_kind, r.policy, r.repetition, r.env_seed, r.success as u8, r.interactions, r.timesteps, r.task_return
            )
            .unwrap();
        }
        out
    }
}

/// Side-by-side table: one column per (report, policy), three metric rows,
/// best value per row in bold; then deltas against the first column and,
/// when both are present, the learned-vs-always interactions ratio.
pub fn compare(reports: &[(String, EvalReport)]) -> Result<String> {
    if reports.len() < 2 {
        return Err(Error::Usage("compare needs at least two reports".into()));
    }
    let env = reports[0].1.env_kind;
    if let Some((name, r)) = reports.iter().find(|(_, r)| r.env_kind != env) {
        return Err(Error::Mismatch(format!(
            "{name} is for {} but the first report is for {env}",
            r.env_kind
        )));
    }
    let cols: Vec<(String, &PolicyAggregate)> = reports
        .iter()
        .flat_map(|(name, r)| r.aggregates.iter().map(move |a| (format!("{} ({name})", a.policy), a)))
        .collect();
    type Metric = (&'static str, fn(&PolicyAggregate) -> f64, bool);
    let metrics: [Metric; 3] = [
        ("interactions", |a| a.mean_interactions, false),
        ("timesteps", |a| a.mean_timesteps, false),
        ("success rate", |a| a.success_rate, true),
    ];
    let mut out = format!("## {env}\n\n| metric |");
    for (c, _) in &cols {
        write!(out, " {c} |").unwrap();
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(cols.len()));
    out.push('\n');
    for (label, get, higher) in metrics {
        let vals: Vec<f64> = cols.iter().map(|(_, a)| get(a)).collect();
        let best = if higher {
            vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        } else {
            vals.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        write!(out, "| {label} |").unwrap();
        for v in vals {
            if v == best {
                write!(out, " **{v:.2}** |").unwrap();
            } else {
                write!(out, " {v:.2} |").unwrap();
            }
        }
        out.push('\n');
    }
    let (first, base) = &cols[0];
    writeln!(out, "\nDeltas against {first}:\n").unwrap();
    for (label, get, _) in metrics {
        write!(out, "| {label} |").unwrap();
        for (_, a) in &cols {
            write!(out, " {:+.2} |", get(a) - get(base)).unwrap();
        }
        out.push('\n');
    }
    let find = |p: &str| cols.iter().find(|(_, a)| a.policy == p).map(|(_, a)| *a);
    if let (Some(ours), Some(always)) = (find("learned"), find("always")) {
        if always.mean_interactions > 0.0 {
            writeln!(
                out,
                "\nlearned/always interactions ratio: {:.3}",
                ours.mean_interactions / always.mean_interactions
            )
            .unwrap();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(policy: &str, seed: u64, success: bool, inter: usize, steps: usize) -> EpisodeRow {
        EpisodeRow {
            policy: policy.into(),
            train_seed: None,
            repetition: 0,
            env_seed: seed,
            success,
            interactions: inter,
            timesteps: steps,
            task_return: 0.5,
        }
    }

    fn report(env: EnvKind, policy: &str) -> EvalReport {
        EvalReport::new(
            env,
            "oracle",
            vec![row(policy, 1, true, 4, 20), row(policy, 2, false, 6, 40)],
            Provenance::new("h".into(), vec![]),
        )
    }

    #[test]
    fn aggregates_are_means_of_rows() {
        let r = report(EnvKind::SimpleDoorKey, "always");
        let a = &r.aggregates[0];
        assert_eq!((a.mean_interactions, a.mean_timesteps, a.success_rate), (5.0, 30.0, 0.5));
        assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(r.episodes_csv().lines().count(), 3);
    }

    #[test]
    fn five_policies_give_five_columns_and_three_rows() {
        let names = ["learned", "hard_coded", "always", "random", "never"];
        let reports: Vec<(String, EvalReport)> =
            names.iter().map(|p| (p.to_string(), report(EnvKind::SimpleDoorKey, p))).collect();
        let table = compare(&reports).unwrap();
        let header = table.lines().find(|l| l.starts_with("| metric")).unwrap();
        assert_eq!(header.matches(" |").count(), 6);
        let rows = table.lines().take_while(|l| !l.starts_with("Deltas")).filter(|l| l.starts_with("| ") && !l.starts_with("| metric")).count();
        assert_eq!(rows, 3);
        assert!(table.contains("learned/always interactions ratio: 1.000"));
    }

    #[test]
    fn a_report_compared_with_itself_has_zero_deltas() {
        let r = report(EnvKind::KeyInBox, "always");
        let table = compare(&[("a".into(), r.clone()), ("b".into(), r)]).unwrap();
        let deltas = table.split("Deltas").nth(1).unwrap();
        assert!(deltas.lines().filter(|l| l.starts_with('|')).all(|l| l.matches("+0.00").count() == 2));
    }

    #[test]
    fn mismatched_env_kinds_exit_4() {
        let e = compare(&[
            ("a".into(), report(EnvKind::KeyInBox, "always")),
            ("b".into(), report(EnvKind::SimpleDoorKey, "always")),
        ])
        .unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }
}
