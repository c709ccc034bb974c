//! Flat key-value simulation config (TOML syntax).
//!
//! ```toml
//! means = [1.0, 0.0]
//! mode = "exact-advantage"
//! steps = 2000
//! eta = 0.1
//! seed = 1
//! ```
//!
//! A run manifest is also accepted: its `[config]` table is the resolved
//! config of the run that produced it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::bandit::{AdvantageMode, BanditEnv, Baseline, InitialLogits, SimConfig};
use crate::simplex::Logits;

/// Config as written by a user; optional keys take defaults on resolution.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub arms: Option<usize>,
    pub means: Option<Vec<f64>>,
    pub noise_std: Option<f64>,
    pub mode: Option<AdvantageMode>,
    pub steps: Option<u64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub baseline: Option<Baseline>,
    pub snapshot_logits: Option<bool>,
    pub initial_logits: Option<Vec<f64>>,
}

/// Every key filled in; this is what manifests record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub arms: usize,
    pub means: Vec<f64>,
    pub noise_std: f64,
    pub mode: AdvantageMode,
    pub steps: u64,
    pub eta: f64,
    pub seed: u64,
    pub baseline: Baseline,
    pub snapshot_logits: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_logits: Option<Vec<f64>>,
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("{field}: required key is missing"))
}

impl RawConfig {
    pub fn resolve(self) -> Result<ResolvedConfig, CliError> {
        let means = self.means.ok_or_else(|| missing("means"))?;
        let arms = self.arms.unwrap_or(means.len());
        if arms != means.len() {
            return Err(CliError::Config(format!(
                "arms: {arms} does not match the {} entries in means",
                means.len()
            )));
        }
        let resolved = ResolvedConfig {
            arms,
            means,
            noise_std: self.noise_std.unwrap_or(0.0),
            mode: self.mode.unwrap_or(AdvantageMode::ExactAdvantage),
            steps: self.steps.ok_or_else(|| missing("steps"))?,
            eta: self.eta.ok_or_else(|| missing("eta"))?,
            seed: self.seed.unwrap_or(0),
            baseline: self.baseline.unwrap_or_default(),
            snapshot_logits: self.snapshot_logits.unwrap_or(false),
            initial_logits: self.initial_logits,
        };
        resolved.build()?;
        Ok(resolved)
    }
}

impl ResolvedConfig {
    /// Validates and converts into simulator inputs.
    pub fn build(&self) -> Result<(BanditEnv, SimConfig), CliError> {
        let env =
            BanditEnv::new(self.means.clone(), self.noise_std, self.mode).map_err(config_error)?;
        let initial_logits = match &self.initial_logits {
            None => InitialLogits::Zeros,
            Some(values) => {
                if values.len() != self.arms {
                    return Err(CliError::Config(format!(
                        "initial_logits: expected {} entries, got {}",
                        self.arms,
                        values.len()
                    )));
                }
                InitialLogits::Values(
                    Logits::new(values.clone())
                        .map_err(|e| CliError::Config(format!("initial_logits: {e}")))?,
                )
            }
        };
        let cfg = SimConfig {
            steps: self.steps,
            learning_rate: self.eta,
            seed: self.seed,
            initial_logits,
            baseline: self.baseline,
            snapshot_logits: self.snapshot_logits,
        };
        cfg.validate().map_err(config_error)?;
        Ok((env, cfg))
    }
}

fn config_error(e: crate::Error) -> CliError {
    match e {
        crate::Error::InvalidParameter { name, reason } => {
            CliError::Config(format!("{name}: {reason}"))
        }
        other => CliError::Config(other.to_string()),
    }
}

#[derive(Deserialize)]
struct ManifestConfigOnly {
    config: ResolvedConfig,
}

/// Parses either a plain config or a manifest with a `[config]` table.
pub fn parse_config(text: &str) -> Result<ResolvedConfig, CliError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    if table.contains_key("config") {
        let m: ManifestConfigOnly = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed manifest config: {e}")))?;
        m.config.build()?;
        return Ok(m.config);
    }
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    raw.resolve()
}

pub fn load_config(path: &Path) -> Result<ResolvedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
