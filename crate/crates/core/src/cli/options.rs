use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    D3qn,
    Rees,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    D3qn,
    Rees,
    GreedyOracle,
    Random,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::D3qn => "d3qn",
            EvalMode::Rees => "rees",
            EvalMode::GreedyOracle => "greedy-oracle",
            EvalMode::Random => "random",
        }
    }
}

impl TrainMode {
    pub fn name(self) -> &'static str {
        match self {
            TrainMode::D3qn => "d3qn",
            TrainMode::Rees => "rees",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Symmetric force bound B.
    #[arg(long)]
    pub force_bound: Option<f64>,
    /// Number of low-order harmonics.
    #[arg(long)]
    pub smoothness: Option<usize>,
    /// Relative noise on each column's harmonic coefficients.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Peak magnitude of the deviation field.
    #[arg(long)]
    pub deviation_scale: Option<f64>,
    /// Training instances to generate.
    #[arg(long)]
    pub train: Option<usize>,
    /// Test instances to generate.
    #[arg(long)]
    pub test: Option<usize>,
    /// Output files are `<name>.train` and `<name>.test`.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyArgs {
    /// Dataset file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Actuators to select, M.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Fill the runtime_ms column (makes the output machine dependent).
    #[arg(long)]
    pub timing: bool,
    /// Skip the exhaustive comparison even when it is small enough.
    #[arg(long)]
    pub no_exhaustive: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub mode: Option<TrainMode>,
    /// Training dataset file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Actuators selected per training episode.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Training length in episodes (`episodes * budget` environment steps).
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Training length in environment steps; overrides `--episodes`.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub replay_capacity: Option<usize>,
    /// Environment steps between target-network copies.
    #[arg(long)]
    pub target_sync: Option<usize>,
    /// Transitions collected before the first update.
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Comma-separated hidden widths of the shared row encoder.
    #[arg(long, value_delimiter = ',')]
    pub encoder_widths: Option<Vec<usize>>,
    /// Comma-separated hidden widths of the value and advantage heads.
    #[arg(long, value_delimiter = ',')]
    pub head_widths: Option<Vec<usize>>,
    /// Comma-separated hidden widths of the reward-estimation network.
    #[arg(long, value_delimiter = ',')]
    pub reward_widths: Option<Vec<usize>>,
    /// Disable cyclic-shift augmentation of replayed samples.
    #[arg(long)]
    pub no_augment: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub mode: Option<EvalMode>,
    /// Dataset file to evaluate on.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Checkpoint file; defaults to `<out-dir>/<mode>.checkpoint.json`.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Budget-mode episodes with M actuators.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Spec-limit episodes: stop once the maximum gap is below this.
    #[arg(long)]
    pub limit: Option<f64>,
    /// Comma-separated spec limits; one summary per limit.
    #[arg(long, value_delimiter = ',')]
    pub limits: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinActuatorsArgs {
    #[arg(long, value_enum)]
    pub mode: Option<EvalMode>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// A single spec limit.
    #[arg(long)]
    pub limit: Option<f64>,
    /// Comma-separated spec limits.
    #[arg(long, value_delimiter = ',')]
    pub limits: Option<Vec<f64>>,
}

/// Top-level layout of the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub gen: toml::Table,
    #[serde(default)]
    pub greedy: toml::Table,
    #[serde(default)]
    pub train: toml::Table,
    #[serde(default)]
    pub eval: toml::Table,
    #[serde(default)]
    pub min_actuators: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// Overlays the flags that were actually given (non-null, non-false) on the config table.
pub fn merge<T>(flags: &T, section: &toml::Table, name: &str) -> Result<T>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged: Value = serde_json::to_value(section)?;
    let Value::Object(ref mut base) = merged else {
        bail!("config section [{name}] is not a table");
    };
    let Value::Object(given) = serde_json::to_value(flags)? else {
        unreachable!("argument structs serialise to objects");
    };
    for (key, value) in given {
        if !matches!(value, Value::Null | Value::Bool(false)) {
            base.insert(key, value);
        }
    }
    serde_json::from_value(merged).with_context(|| format!("invalid config section [{name}]"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_values() {
        let section: toml::Table = toml::from_str("n = 30\nm = 9\nname = \"cfg\"").unwrap();
        let flags = GenArgs {
            m: Some(5),
            ..GenArgs::default()
        };
        let merged = merge(&flags, &section, "gen").unwrap();
        assert_eq!(merged.n, Some(30));
        assert_eq!(merged.m, Some(5));
        assert_eq!(merged.name.as_deref(), Some("cfg"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let section: toml::Table = toml::from_str("bogus = 1").unwrap();
        assert!(merge(&GenArgs::default(), &section, "gen").is_err());
    }

    #[test]
    fn config_can_enable_switches() {
        let section: toml::Table = toml::from_str("timing = true\nlimits = [0.1, 0.2]").unwrap();
        let merged = merge(&GreedyArgs::default(), &section, "greedy");
        assert!(merged.is_err());
        let merged = merge(&GreedyArgs::default(), &toml::from_str("timing = true").unwrap(), "greedy").unwrap();
        assert!(merged.timing);
        let merged = merge(&EvalArgs::default(), &toml::from_str("limits = [0.1, 0.2]\nmode = \"greedy-oracle\"").unwrap(), "eval").unwrap();
        assert_eq!(merged.limits, Some(vec![0.1, 0.2]));
        assert_eq!(merged.mode, Some(EvalMode::GreedyOracle));
    }
}
