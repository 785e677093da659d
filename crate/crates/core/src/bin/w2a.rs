use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use w2a::harness::{
    compare, run_eval, run_render, run_train, write_report, EvalReport, ExperimentConfig, MockScript, MockServer,
};
use w2a::mediator::PolicyKind;
use w2a::{Error, Result};

#[derive(Parser)]
#[command(name = "w2a", version, about = "Train and evaluate planner-asking policies on door-key gridworlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one network per training seed; writes curves.csv and checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate on the held-out seeds; writes report.json and episodes.csv.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint file or training output directory (overrides the config).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Asking policy (overrides the config).
        #[arg(long)]
        policy: Option<PolicyKind>,
        /// Output directory (default: <output_dir>/eval-<policy>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Side-by-side table of two or more eval reports.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        /// Also write the markdown table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a per-step trace of one episode.
    Render {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        policy: Option<PolicyKind>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Serve scripted chat completions.
    MockLlm {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 8000)]
        port: u16,
        /// Append one JSON line per request here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn with_checkpoint(mut cfg: ExperimentConfig, checkpoint: Option<PathBuf>, policy: Option<PolicyKind>) -> ExperimentConfig {
    if let Some(c) = checkpoint {
        if cfg.planner.kind == w2a::harness::PlannerKind::Learned {
            cfg.planner.checkpoint = Some(c);
        } else {
            cfg.mediator.checkpoint = Some(c);
        }
    }
    if let Some(p) = policy {
        cfg.mediator.policy = p;
    }
    cfg
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            for p in run_train(&cfg)? {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", cfg.output_dir.join("curves.csv").display());
        }
        Command::Eval { config, checkpoint, policy, out } => {
            let cfg = with_checkpoint(ExperimentConfig::load(&config)?, checkpoint, policy);
            let report = run_eval(&cfg, None)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.join(format!("eval-{}", cfg.mediator.policy)));
            write_report(&report, &dir)?;
            for a in &report.aggregates {
                println!(
                    "{} {}: interactions {:.2}, timesteps {:.2}, success {:.2} over {} episodes",
                    report.env_kind, a.policy, a.mean_interactions, a.mean_timesteps, a.success_rate, a.episodes
                );
            }
            println!("wrote {}", dir.display());
        }
        Command::Compare { reports, out } => {
            let loaded = reports
                .iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                    let name = p
                        .parent()
                        .and_then(|d| d.file_name())
                        .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
                    Ok((name, EvalReport::from_json(&text)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let table = compare(&loaded)?;
            print!("{table}");
            if let Some(o) = out {
                std::fs::write(o, &table)?;
            }
        }
        Command::Render { config, seed, policy, checkpoint } => {
            let cfg = with_checkpoint(ExperimentConfig::load(&config)?, checkpoint, None);
            let (_, text) = run_render(&cfg, seed, policy)?;
            print!("{text}");
        }
        Command::MockLlm { script, port, log } => {
            let server = MockServer::start(MockScript::load(&script)?, port, log)?;
            println!("serving {}", server.url());
            server.wait();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
