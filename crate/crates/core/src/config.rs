//! Run configuration: JSON schema, loading and validation with
//! field-path diagnostics.

use serde::{Deserialize, Serialize};

use crate::coulomb::SystemParams;
use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::perturb::PerturbationSpec;
use crate::spectral::Packet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Pure-Coulomb structure checks on the lambda grid.
    Coulomb,
    /// Per-energy scattering data.
    Scatter,
    /// Transform suite: Parseval, round trips, intertwining.
    Spectral,
    /// Stationary/dynamical comparison across the lambda grid.
    Ergodic,
    /// Classical-case identities and equality with A = 0.
    FreeCase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSection {
    pub mass: f64,
    pub angular: f64,
    pub coulomb_strength: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    /// Only "smooth-bump" is defined.
    #[serde(default = "default_shape")]
    pub shape: String,
    /// "upper_on_positive" or "lower_on_negative"; derived from the
    /// center sign when omitted.
    #[serde(default)]
    pub component: Option<String>,
}

fn default_shape() -> String {
    "smooth-bump".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGridSection {
    pub base: Vec<f64>,
    #[serde(default = "default_time_scale")]
    pub scale: String,
}

fn default_time_scale() -> String {
    "inverse_epsilon".to_string()
}

/// Tolerance gates; every field has the module default.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "d_ergodic")]
    pub ergodic_residual: f64,
    #[serde(default = "d_parseval_free")]
    pub parseval_free: f64,
    #[serde(default = "d_parseval_perturbed")]
    pub parseval_perturbed: f64,
    #[serde(default = "d_limit_value")]
    pub limit_value: f64,
    #[serde(default = "d_cross")]
    pub picard_rk_cross: f64,
}

fn d_ergodic() -> f64 {
    1e-3
}
fn d_parseval_free() -> f64 {
    1e-6
}
fn d_parseval_perturbed() -> f64 {
    1e-4
}
fn d_limit_value() -> f64 {
    1e-2
}
fn d_cross() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ergodic_residual: d_ergodic(),
            parseval_free: d_parseval_free(),
            parseval_perturbed: d_parseval_perturbed(),
            limit_value: d_limit_value(),
            picard_rk_cross: d_cross(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemSection,
    pub perturbation: PerturbationSpec,
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub packets: Vec<PacketSpec>,
    #[serde(default)]
    pub time_grid: Option<TimeGridSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub scenario: Scenario,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_output_dir() -> String {
    "out".to_string()
}

impl RunConfig {
    pub fn system_params(&self) -> Result<SystemParams> {
        SystemParams::new(
            self.system.mass,
            self.system.angular,
            self.system.coulomb_strength,
        )
    }

    /// Validate every module-level precondition reachable from the file.
    pub fn validate(&self) -> Result<()> {
        let params = self.system_params()?;
        if self.scenario == Scenario::FreeCase && self.system.coulomb_strength != 0.0 {
            return Err(Error::validation(
                "system.coulomb_strength",
                "the free-case scenario requires A = 0",
            ));
        }
        self.perturbation.validate().map_err(|e| match e {
            Error::Validation { path, message } => Error::Validation {
                path: format!("perturbation.{path}"),
                message,
            },
            other => other,
        })?;
        if self.lambda_grid.is_empty() {
            return Err(Error::validation("lambda_grid", "at least one energy"));
        }
        for (i, &lambda) in self.lambda_grid.iter().enumerate() {
            crate::coulomb::make_energy(&params, lambda).map_err(|_| {
                Error::validation(
                    format!("lambda_grid[{i}]"),
                    format!(
                        "|lambda| = {} must exceed m + gap = {}",
                        lambda.abs(),
                        self.system.mass * (1.0 + crate::coulomb::DEFAULT_GAP_FACTOR)
                    ),
                )
            })?;
        }
        for (i, p) in self.packets.iter().enumerate() {
            if p.shape != "smooth-bump" {
                return Err(Error::validation(
                    format!("packets[{i}].shape"),
                    "only \"smooth-bump\" is defined",
                ));
            }
            let packet = Packet::new(self.system.mass, p.center, p.width).map_err(|e| {
                Error::validation(format!("packets[{i}]"), e.to_string())
            })?;
            if let Some(comp) = &p.component {
                let want = if packet.center > 0.0 {
                    "upper_on_positive"
                } else {
                    "lower_on_negative"
                };
                if comp != want {
                    return Err(Error::validation(
                        format!("packets[{i}].component"),
                        format!("support on this branch demands \"{want}\""),
                    ));
                }
            }
        }
        if let Some(tg) = &self.time_grid {
            if tg.base.len() < 2 {
                return Err(Error::validation("time_grid.base", "need at least two times"));
            }
            if !tg.base.windows(2).all(|w| w[1] > w[0]) {
                return Err(Error::validation(
                    "time_grid.base",
                    "times must be strictly increasing",
                ));
            }
            if tg.scale != "inverse_epsilon" {
                return Err(Error::validation(
                    "time_grid.scale",
                    "only \"inverse_epsilon\" is defined",
                ));
            }
        }
        Ok(())
    }

    pub fn dynamics_config(&self) -> DynamicsConfig {
        let mut cfg = DynamicsConfig::default();
        if let Some(tg) = &self.time_grid {
            cfg.time_base = tg.base.clone();
        }
        cfg
    }

    /// Deterministic content hash of the canonical JSON encoding.
    pub fn content_hash(&self) -> String {
        let encoded = serde_json::to_string(self).unwrap_or_default();
        // FNV-1a, 64 bit.
        let mut h: u64 = 0xcbf29ce484222325;
        for b in encoded.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// Load and validate a config file.
pub fn load_config(path: &str) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {path}: {e}")))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}
