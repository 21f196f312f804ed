//! Experiment harness: TOML configs, CSV traces, SVG charts, batch runs and
//! the oracle checks behind `kcover verify`.

pub mod csvio;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod settings;
pub mod verify;

pub use error::{exit, CliError};
pub use experiment::{run_experiment, ExperimentReport, ExperimentSpec};
