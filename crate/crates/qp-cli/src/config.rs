//! Experiment configuration: a versioned JSON schema.
//!
//! A run must be reproducible from config + code version, so everything an
//! experiment touches is spelled out here and echoed into the outputs.

use anyhow::{anyhow, bail, Context, Result};
use qp_core::msa::{ScaleParams, ScheduleMode, ThresholdExponents};
use qp_core::operator::OperatorParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: String,
    pub model: ModelSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedule: Option<ScheduleSection>,
    #[serde(default)]
    pub green: Option<GreenSection>,
    #[serde(default)]
    pub msa: Option<MsaSection>,
    #[serde(default)]
    pub ids: Option<IdsSection>,
    #[serde(default)]
    pub localize: Option<LocalizeSection>,
    #[serde(default)]
    pub diophantine: Option<DiophantineSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSection {
    pub eps: f64,
    pub omega: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub energy: f64,
}

impl ModelSection {
    pub fn params(&self) -> OperatorParams {
        OperatorParams::new(self.eps, self.omega.clone(), self.theta, self.energy)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleSection {
    pub c: f64,
    pub tau: f64,
    pub gamma: f64,
    /// "theoretical" or "practical".
    pub mode: String,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub n1: Option<u64>,
    #[serde(default)]
    pub delta0_override: Option<f64>,
    #[serde(default)]
    pub widened_exponent: Option<f64>,
    #[serde(default)]
    pub disc_c1_exponent: Option<f64>,
    #[serde(default)]
    pub disc_c2_exponent: Option<f64>,
    #[serde(default)]
    pub pair_factor: Option<f64>,
}

impl ScheduleSection {
    pub fn scale_params(&self, eps: f64) -> Result<ScaleParams> {
        let mode = match self.mode.as_str() {
            "theoretical" => ScheduleMode::Theoretical,
            "practical" => ScheduleMode::Practical {
                kappa: self.kappa.unwrap_or(3.0),
                rho: self.rho.unwrap_or(2.0),
                n1: self.n1.unwrap_or(8),
            },
            other => bail!("schedule.mode: unknown mode {other:?} (theoretical|practical)"),
        };
        let mut scale = ScaleParams::new(self.c, self.tau, self.gamma, eps, mode);
        scale.delta0_override = self.delta0_override;
        let mut exps = ThresholdExponents::default();
        if let Some(w) = self.widened_exponent {
            exps.widened = w;
        }
        if let Some(x) = self.disc_c1_exponent {
            exps.disc_c1 = x;
        }
        if let Some(x) = self.disc_c2_exponent {
            exps.disc_c2 = x;
        }
        if let Some(p) = self.pair_factor {
            exps.pair_factor = p;
        }
        scale.exponents = exps;
        Ok(scale)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenSection {
    /// Window radius: the operator is assembled on `Λ_N(0)`.
    pub window: u64,
    /// Resonance threshold δ₀ for the 0-good check (default ε^{1/10}).
    #[serde(default)]
    pub delta0: Option<f64>,
    /// Invert and assert the certificate bounds entrywise.
    #[serde(default = "default_true")]
    pub verify: bool,
    /// Decay-fit threshold radius.
    #[serde(default)]
    pub threshold_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MsaSection {
    pub stages: u32,
    pub window: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdsSection {
    pub n: u64,
    pub theta_samples: usize,
    pub energy_grid: GridSection,
    pub etas: Vec<f64>,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSection {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizeSection {
    pub n: u64,
    pub tau1: f64,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    /// Decay-rate pass threshold; defaults to (1/24)|log ε|.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Phase-condition scan range [r_min, r_max].
    pub phase_range: (u64, u64),
    #[serde(default)]
    pub profile_dump: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiophantineSection {
    pub tau: f64,
    pub gamma: f64,
    pub radius: u64,
}

fn default_true() -> bool {
    true
}

fn default_r_min() -> f64 {
    5.0
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| "parsing config JSON")?;
        config.validate()?;
        Ok(config)
    }

    /// Field-level validation; normalizations are logged as warnings.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            );
        }
        if self.model.omega.is_empty() {
            bail!("model.omega: frequency vector must be nonempty");
        }
        if self.model.eps < 0.0 {
            bail!("model.eps: coupling must be nonnegative");
        }
        match self.experiment.as_str() {
            "green" => {
                self.green
                    .as_ref()
                    .ok_or_else(|| anyhow!("green: section required for experiment \"green\""))?;
            }
            "msa" => {
                self.msa
                    .as_ref()
                    .ok_or_else(|| anyhow!("msa: section required for experiment \"msa\""))?;
                self.schedule
                    .as_ref()
                    .ok_or_else(|| anyhow!("schedule: section required for experiment \"msa\""))?;
            }
            "ids" => {
                let ids = self
                    .ids
                    .as_ref()
                    .ok_or_else(|| anyhow!("ids: section required for experiment \"ids\""))?;
                if ids.energy_grid.points == 0 {
                    bail!("ids.energy_grid.points: energy grid must be nonempty");
                }
                if ids.etas.is_empty() {
                    bail!("ids.etas: at least one window half-width required");
                }
                if ids.etas.iter().any(|&e| e <= 0.0) {
                    bail!("ids.etas: window half-widths must be positive");
                }
                if ids.theta_samples == 0 {
                    bail!("ids.theta_samples: at least one phase sample required");
                }
            }
            "localize" => {
                let l = self.localize.as_ref().ok_or_else(|| {
                    anyhow!("localize: section required for experiment \"localize\"")
                })?;
                if l.n == 0 {
                    bail!("localize.n: window radius must be positive");
                }
            }
            "diophantine" => {
                let d = self.diophantine.as_ref().ok_or_else(|| {
                    anyhow!("diophantine: section required for experiment \"diophantine\"")
                })?;
                if d.radius == 0 {
                    bail!("diophantine.radius: radius must be at least 1");
                }
            }
            other => bail!("experiment: unknown experiment {other:?}"),
        }
        Ok(())
    }

    /// Sorted, deduplicated η list (the normalization is warned about when
    /// it changes the input).
    pub fn normalized_etas(&self) -> Vec<f64> {
        let mut etas = self
            .ids
            .as_ref()
            .map(|i| i.etas.clone())
            .unwrap_or_default();
        let original = etas.clone();
        etas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        etas.dedup();
        if etas != original {
            log::warn!("ids.etas normalized (sorted, deduplicated)");
        }
        etas
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_energy_grid_names_the_field() {
        let json = serde_json::json!({
            "schema_version": 1,
            "experiment": "ids",
            "model": {"eps": 1e-3, "omega": [0.618]},
            "ids": {
                "n": 100, "theta_samples": 4,
                "energy_grid": {"min": -2.0, "max": 2.0, "points": 0},
                "etas": [1e-2], "mu": 0.1
            }
        });
        let config: ExperimentConfig = serde_json::from_value(json).unwrap();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("energy_grid"), "{err}");
    }

    #[test]
    fn eta_normalization_sorts_and_dedups() {
        let json = serde_json::json!({
            "schema_version": 1,
            "experiment": "ids",
            "model": {"eps": 1e-3, "omega": [0.618]},
            "ids": {
                "n": 100, "theta_samples": 4,
                "energy_grid": {"min": -2.0, "max": 2.0, "points": 3},
                "etas": [1e-2, 1e-4, 1e-2, 1e-3], "mu": 0.1
            }
        });
        let config: ExperimentConfig = serde_json::from_value(json).unwrap();
        config.validate().unwrap();
        assert_eq!(config.normalized_etas(), vec![1e-4, 1e-3, 1e-2]);
    }

    #[test]
    fn grid_values_are_inclusive() {
        let grid = GridSection {
            min: -2.0,
            max: 2.0,
            points: 5,
        };
        assert_eq!(grid.values(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }
}
