//! TOML run configurations and command-line overrides.
//!
//! Every [`SimulationConfig`] field is a top-level key of the same name;
//! missing keys take the grid-preset defaults.
//!
//! ```toml
//! k = 3
//! loss_probability = 0.05
//! seed = 7
//!
//! [topology]
//! kind = "uniform_random"
//! n = 60
//! width_m = 100.0
//! height_m = 100.0
//!
//! [scheduler]
//! kind = "random"
//! p_sleep = 0.25
//! ```

use std::path::Path;

use kcover::{SchedulerKind, SimulationConfig};

use crate::error::CliError;

pub fn parse_config(text: &str, path: &Path) -> Result<SimulationConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::ConfigFile { path: path.to_path_buf(), message: e.to_string() })
}

pub fn load_config(path: &Path) -> Result<SimulationConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, path)
}

pub fn to_toml(config: &SimulationConfig) -> String {
    toml::to_string(config).expect("config is always representable as TOML")
}

/// Values given on the command line; each replaces the config key it names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub loss: Option<f64>,
    pub scheduler: Option<SchedulerKind>,
    pub p_sleep: Option<f64>,
    pub max_periods: Option<u32>,
}

impl Overrides {
    /// `p_sleep` applies after `scheduler`, turning any scheduler into the
    /// random baseline with that probability.
    pub fn apply(&self, config: &mut SimulationConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(loss) = self.loss {
            config.loss_probability = loss;
        }
        if let Some(s) = self.scheduler {
            config.scheduler = s;
        }
        if let Some(p_sleep) = self.p_sleep {
            config.scheduler = SchedulerKind::Random { p_sleep };
        }
        if let Some(m) = self.max_periods {
            config.max_periods = m;
        }
    }
}
