//! Machine-readable experiment description.

use std::path::PathBuf;

use hopf_tda::dynsys::{NoiseSpec, SystemParams, TrajectoryConfig};
use hopf_tda::functional::{linspace, EmbeddingMode, PipelineConfig};
use hopf_tda::lyapunov::LyapunovConfig;
use hopf_tda::persistence::PersistenceConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.count)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub dt: f64,
    pub n_steps: usize,
    pub transient_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub observe_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    /// Standard deviation relative to the clean series; `0` means clean.
    pub levels: Vec<f64>,
    /// Grid point `j` draws from `seed + j`.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Base system; its control parameter is overwritten by the grid.
    pub system: SystemParams<f64>,
    /// Must name the control parameter of `system`.
    pub parameter: String,
    pub grid: Grid,
    pub trajectory: Trajectory,
    pub noise: Noise,
    pub embedding: EmbeddingMode,
    pub persistence: PersistenceConfig,
    pub betti_grid_size: usize,
    /// Known critical value, drawn as a marker in plots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovConfig<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.system.validate()?;
        let control = self.system.id().control_name();
        if self.parameter != control {
            return bad(format!(
                "parameter {:?} is not the control of this system ({control})",
                self.parameter
            ));
        }
        let g = &self.grid;
        if g.count < 2 {
            return bad(format!("grid.count must be >= 2, got {}", g.count));
        }
        if !(g.min.is_finite() && g.max.is_finite() && g.min < g.max) {
            return bad("grid needs finite min < max".into());
        }
        if self.noise.levels.is_empty() {
            return bad("noise.levels must list at least one level (0 for clean)".into());
        }
        if let Some(l) = self.noise.levels.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return bad(format!("noise level {l} must be finite and >= 0"));
        }
        if self.persistence.n_max == 0 {
            return bad("persistence.n_max must be >= 1".into());
        }
        if self.betti_grid_size < 2 {
            return bad("betti_grid_size must be >= 2".into());
        }
        if let EmbeddingMode::Fixed { tau, m } = self.embedding {
            hopf_tda::embedding::EmbeddingParams::new(tau, m)?;
        }
        self.trajectory_config().validate(self.system.id())?;
        Ok(())
    }

    pub fn trajectory_config(&self) -> TrajectoryConfig<f64> {
        let t = &self.trajectory;
        TrajectoryConfig {
            dt: t.dt,
            n_steps: t.n_steps,
            transient_steps: t.transient_steps,
            initial_state: t
                .initial_state
                .clone()
                .unwrap_or_else(|| self.system.default_initial_state()),
            observe_index: t.observe_index,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            embedding: self.embedding,
            persistence: self.persistence,
            betti_grid_size: self.betti_grid_size,
        }
    }

    pub fn noise_spec(&self, level: f64) -> Option<NoiseSpec> {
        (level > 0.0).then_some(NoiseSpec {
            sigma_rel: level,
            seed: self.noise.seed,
        })
    }

    /// Applies a global `--seed` to every random choice of the experiment.
    pub fn reseed(&mut self, seed: u64) {
        self.noise.seed = seed;
        self.persistence.seed = seed;
        if let Some(l) = &mut self.lyapunov {
            l.seed = seed;
        }
    }
}

/// The three reproduction recipes shipped with the binary.
pub mod cases {
    use super::ExperimentConfig;
    use crate::error::{CliError, Result};

    pub const CASE_A: &str = include_str!("../configs/case_a.json");
    pub const CASE_B: &str = include_str!("../configs/case_b.json");
    pub const CASE_C: &str = include_str!("../configs/case_c.json");

    pub fn bundled(name: &str) -> Result<ExperimentConfig> {
        let text = match name.to_ascii_lowercase().as_str() {
            "a" | "case_a" => CASE_A,
            "b" | "case_b" => CASE_B,
            "c" | "case_c" => CASE_C,
            other => {
                return Err(CliError::Config(format!(
                    "no bundled case {other:?}; expected a, b or c"
                )))
            }
        };
        ExperimentConfig::from_json(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_round_trip() {
        for name in ["a", "b", "c"] {
            let cfg = cases::bundled(name).unwrap();
            let again = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
            assert_eq!(cfg, again);
        }
    }

    #[test]
    fn single_point_grid_rejected() {
        let mut cfg = cases::bundled("a").unwrap();
        cfg.grid.count = 1;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn wrong_parameter_name_rejected() {
        let mut cfg = cases::bundled("b").unwrap();
        cfg.parameter = "mu".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn negative_noise_rejected() {
        let mut cfg = cases::bundled("a").unwrap();
        cfg.noise.levels = vec![0.0, -0.1];
        assert!(cfg.validate().is_err());
    }
}
