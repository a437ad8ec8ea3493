//! Optional JSON config file (`--config` or `NAVSIM_CONFIG`).
//!
//! The file holds the simulation config (`world`, `sensors`, `expert`) plus
//! any CLI flag by its long name with dashes as underscores. Flags given on
//! the command line win over the file; the file wins over built-in defaults.

use std::fs;
use std::path::Path;

use navsim_core::SimConfig;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    #[serde(flatten)]
    pub sim: SimConfig,
    pub port: Option<u16>,
    pub bind: Option<String>,
    pub map_seed: Option<u64>,
    pub tick_hz: Option<f64>,
    pub seed: Option<u64>,
    pub maps: Option<usize>,
    pub perturb: Option<f64>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub episodes: Option<usize>,
    pub max_steps: Option<u32>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub log: Option<String>,
}

impl FileConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let cfg: FileConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.sim.world.validate().map_err(|e| Error::Config(e.to_string()))?;
        cfg.sim.sensors.validate().map_err(|e| Error::Config(e.into()))?;
        Ok(cfg)
    }
}
