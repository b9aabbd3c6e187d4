use std::path::Path;

use anyhow::Context;
use gbtopo::pipeline::PipelineConfig;
use gbtopo::topology::OptimizeConfig;
use serde::{Deserialize, Serialize};

/// Settings that can come from a TOML file. Command-line flags override them.
///
/// ```toml
/// seed = 7
/// threads = 4
/// noise = 0.0
/// timing = false
///
/// [pipeline]
/// k = 20
/// solver = "sylvester"
/// area = { grid_resolution = 64, bbox_scale = 1.1 }
///
/// [optimize]
/// steps = 200
/// lr = 1e-3
/// ```
///
/// The command, input and output paths are given on the command line only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; every stochastic stage derives its own seed from it.
    pub seed: u64,
    /// Worker threads. `None` falls back to `GBTOPO_THREADS`, then to rayon's default.
    pub threads: Option<usize>,
    /// Positional noise, as a fraction of the bounding-box diagonal.
    pub noise: f64,
    /// Record wall time in reports. Off by default so reports are reproducible.
    pub timing: bool,
    pub pipeline: PipelineConfig,
    pub optimize: OptimizeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: None,
            noise: 0.0,
            timing: false,
            pipeline: PipelineConfig::default(),
            optimize: OptimizeConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| gbtopo::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).with_context(|| format!("reading config {}", path.display()))
    }

    /// Optimizer settings that must agree with the pipeline.
    pub fn optimize_config(&self) -> OptimizeConfig {
        OptimizeConfig {
            solver: self.pipeline.solver,
            centering: self.pipeline.centering,
            area: self.pipeline.area,
            seed: self.seed,
            ..self.optimize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = toml::from_str("seed = 3\n[pipeline]\nk = 12\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.pipeline.k, 12);
        assert_eq!(c.pipeline.area, PipelineConfig::default().area);
        assert_eq!(c.optimize, OptimizeConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(toml::from_str::<RunConfig>("sed = 3\n").is_err());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), c);
    }
}
