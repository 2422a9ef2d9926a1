//! Experiment configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Channel selection: a named preset or a Kraus file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// One of `identity`, `constant`, `depolarizing`, `dephasing`,
    /// `product-broadcast`, `complementary-dephasing`, `copy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Noise parameter of the qubit presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Input dimension of `identity`, `constant` and `copy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Output spectra of `constant` (one per receiver) or the fixed second
    /// output of `product-broadcast`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_file: Option<PathBuf>,
}

/// Raw configuration as read from the file. Every field is optional so that
/// flags can fill or override it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    /// Factor dimensions; the meaning is per command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Per-subset multipliers of `a_n` for `moderate`, in subset bit order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    /// Noise values swept by `capacity-region` for parametrized presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_grid: Option<Vec<f64>>,
    /// Rate vectors tested for region membership.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<Vec<Vec<f64>>>,
    /// Use `ρ = ⊗τ ⊗ ρ_E` in `convex-split` trials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Reads a config file. Relative Kraus paths resolve against the file's
    /// directory.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_str(&text)?;
        if let Some(ch) = cfg.channel.as_mut() {
            if let Some(k) = ch.kraus_file.as_mut() {
                if k.is_relative() {
                    if let Some(dir) = path.parent() {
                        *k = dir.join(&*k);
                    }
                }
            }
        }
        Ok(cfg)
    }

    /// Checks the cross-field invariants once flags have been merged.
    pub fn validate(&self, command: &str) -> Result<(), CliError> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(CliError::Config(format!("config is for `{c}`, invoked as `{command}`")));
            }
        }
        if self.seed.is_none() {
            return Err(CliError::MissingSeed);
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(CliError::Config(format!("tolerance {t} must be positive")));
            }
        }
        if let Some(k) = self.channel.as_ref().and_then(|c| c.kraus_file.as_ref()) {
            if !k.exists() {
                return Err(CliError::Config(format!("Kraus file {} does not exist", k.display())));
            }
        }
        if self.trials == Some(0) {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        Ok(())
    }
}
