//! Command implementations behind the `handover` binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod steps;

pub use commands::{cmd_eval, cmd_generate, cmd_synth, cmd_train, ControllerChoice, TrainFlags};
pub use config::EvalConfig;
pub use report::{EvalReport, Metrics, TrialReport};
