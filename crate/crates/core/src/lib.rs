pub mod encode;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod mediator;
pub mod options;
pub mod planner;
pub mod training;
pub mod translator;

pub use error::{Error, Result};
