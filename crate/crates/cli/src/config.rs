//! Flag and config-file resolution.
//!
//! The config file is flat TOML whose keys are the long flag names
//! (`lambda-count = 50`, `method = "arm,bic-p"`). A flag given on the command
//! line replaces the file's value for that key outright; list values are
//! never merged. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use soil_core::{CandidateStrategy, PenaltyKind, SoilConfig, Task, WeightingMethod};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CommonArgs {
    /// Flat key-value TOML file; flags override its entries.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Weighting methods, comma separated: arm, bic-p, fiducial.
    #[arg(long)]
    pub method: Option<String>,
    /// Prior strength on model complexity.
    #[arg(long, allow_negative_numbers = true)]
    pub psi: Option<f64>,
    /// Number of random half splits for ARM.
    #[arg(long)]
    pub splits: Option<usize>,
    /// Penalties whose paths form the candidates, comma separated.
    #[arg(long)]
    pub penalty: Option<String>,
    /// Length of each penalty's lambda grid.
    #[arg(long)]
    pub lambda_count: Option<usize>,
    /// Candidate construction: auto, paths or all-subsets.
    #[arg(long)]
    pub candidates: Option<String>,
    /// Selection thresholds in (0, 1), comma separated.
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; without it only the table is printed.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Options for commands that read a dataset.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DataArgs {
    /// Name of the response column.
    #[arg(long)]
    pub response: Option<String>,
    /// regression or classification.
    #[arg(long)]
    pub task: Option<String>,
}

/// Everything a config file may set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(flatten)]
    pub common: CommonArgs,
    #[serde(flatten)]
    pub data: DataArgs,
    pub input: Option<PathBuf>,
    pub example: Option<String>,
    pub reps: Option<usize>,
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub sigma2: Option<f64>,
    pub top: Option<usize>,
    pub base_method: Option<String>,
}

pub fn read_file_config(path: Option<&Path>) -> Result<FileConfig, UsageError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    // deny_unknown_fields does not combine with flatten, so check keys here.
    let table: toml::Table = toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(UsageError(format!("{}: unknown key '{key}'", path.display())));
        }
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| UsageError(format!("{}: {e}", path.display())))
}

const KNOWN_KEYS: [&str; 20] = [
    "method", "psi", "splits", "penalty", "lambda-count", "candidates", "threshold", "seed", "output", "format",
    "response", "task", "input", "example", "reps", "n", "rho", "sigma2", "top", "base-method",
];

fn list<T: std::str::FromStr<Err = soil_core::SoilError>>(s: &str) -> Result<Vec<T>, UsageError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse().map_err(|e: soil_core::SoilError| UsageError(e.to_string())))
        .collect()
}

/// Resolved settings, recorded in the report's `meta.config`.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub soil: SoilConfig,
    pub thresholds: Vec<f64>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

pub fn resolve_common(flags: &CommonArgs, file: &CommonArgs) -> Result<Resolved, UsageError> {
    let mut soil = SoilConfig::default();
    if let Some(m) = flags.method.as_ref().or(file.method.as_ref()) {
        soil.methods = list::<WeightingMethod>(m)?;
    }
    if let Some(psi) = flags.psi.or(file.psi) {
        soil.psi = psi;
    }
    if let Some(splits) = flags.splits.or(file.splits) {
        soil.n_splits = splits;
    }
    if let Some(p) = flags.penalty.as_ref().or(file.penalty.as_ref()) {
        soil.penalties = list::<PenaltyKind>(p)?;
    }
    if let Some(l) = flags.lambda_count.or(file.lambda_count) {
        soil.lambda_count = l;
    }
    if let Some(c) = flags.candidates.as_ref().or(file.candidates.as_ref()) {
        soil.candidates = c
            .parse::<CandidateStrategy>()
            .map_err(|e| UsageError(e.to_string()))?;
    }
    if let Some(seed) = flags.seed.or(file.seed) {
        soil.seed = seed;
    }
    soil.validate().map_err(|e| UsageError(e.to_string()))?;
    let thresholds = match flags.threshold.as_ref().or(file.threshold.as_ref()) {
        Some(t) => t
            .split(',')
            .map(|v| {
                let c: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| UsageError(format!("threshold '{v}' is not a number")))?;
                if c > 0.0 && c < 1.0 {
                    Ok(c)
                } else {
                    Err(UsageError(format!("threshold {c} lies outside (0, 1)")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    Ok(Resolved {
        soil,
        thresholds,
        output: flags.output.clone().or_else(|| file.output.clone()),
        format: flags.format.or(file.format).unwrap_or(Format::Json),
    })
}

pub fn resolve_task(flags: &DataArgs, file: &DataArgs) -> Result<(String, Task), UsageError> {
    let response = flags
        .response
        .clone()
        .or_else(|| file.response.clone())
        .ok_or_else(|| UsageError("--response is required".into()))?;
    let task = match flags.task.as_ref().or(file.task.as_ref()) {
        Some(t) => t.parse().map_err(|e: soil_core::SoilError| UsageError(e.to_string()))?,
        None => Task::Regression,
    };
    Ok((response, task))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = CommonArgs {
            psi: Some(1.0),
            method: Some("arm,bic-p,fiducial".into()),
            splits: Some(7),
            ..CommonArgs::default()
        };
        let flags = CommonArgs {
            method: Some("bic-p".into()),
            ..CommonArgs::default()
        };
        let r = resolve_common(&flags, &file).unwrap();
        assert_eq!(r.soil.methods, vec![WeightingMethod::BicP]);
        assert_eq!(r.soil.psi, 1.0);
        assert_eq!(r.soil.n_splits, 7);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let bad = |c: CommonArgs| resolve_common(&c, &CommonArgs::default()).is_err();
        assert!(bad(CommonArgs { psi: Some(-1.0), ..Default::default() }));
        assert!(bad(CommonArgs { splits: Some(0), ..Default::default() }));
        assert!(bad(CommonArgs { lambda_count: Some(1), ..Default::default() }));
        assert!(bad(CommonArgs { threshold: Some("1.0".into()), ..Default::default() }));
        assert!(bad(CommonArgs { method: Some("lmg".into()), ..Default::default() }));
    }

    #[test]
    fn config_file_keys_mirror_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "lambda-count = 40\nmethod = \"fiducial\"\nresponse = \"y\"\nreps = 3\n").unwrap();
        let cfg = read_file_config(Some(&path)).unwrap();
        assert_eq!(cfg.common.lambda_count, Some(40));
        assert_eq!(cfg.data.response.as_deref(), Some("y"));
        assert_eq!(cfg.reps, Some(3));
        std::fs::write(&path, "lambda_count = 40\n").unwrap();
        assert!(read_file_config(Some(&path)).is_err());
    }
}
