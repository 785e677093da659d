//! Experiment configuration, evaluation reports, training and rendering
//! runs, and the mock planner server.

mod config;
mod mock;
mod report;
mod runs;
mod seeds;

pub use config::{
    hex_digest, CheckpointChoice, ExperimentConfig, MediatorSection, NetworkSection, PlannerKind, PlannerSection,
};
pub use mock::{LoggedRequest, MockRule, MockScript, MockServer};
pub use report::{compare, EpisodeRow, EvalReport, PolicyAggregate, Provenance};
pub use runs::{
    checkpoint_path, curve_row, format_trace, load_net, load_nets, run_eval, run_render, run_train, write_report,
    LoadedNet, CURVES_HEADER,
};
pub use seeds::test_seeds;
