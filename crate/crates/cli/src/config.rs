//! Run configuration: a TOML file with one section per command, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use gkp_core::analysis::{ErrorRateConfig, LyapunovConfig, VerificationConfig};
use gkp_core::code::ETA_SQUARE;
use gkp_core::lindblad::LogicalOptions;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Experiments at or below this epsilon need `--long-running`.
pub const LONG_RUNNING_EPSILON: f64 = 1.0 / 20.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KappaConfig {
    pub epsilons: Vec<f64>,
    pub eta: f64,
}

impl Default for KappaConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-3, 1e-2, 1e-1],
            eta: ETA_SQUARE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodewordConfig {
    pub epsilon: f64,
    pub eta: f64,
    pub dim: Option<usize>,
}

impl Default for CodewordConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            eta: ETA_SQUARE,
            dim: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogicalConfig {
    pub epsilon: f64,
    pub dim: Option<usize>,
    /// Random density matrices scored against the Bloch ball.
    pub random_states: usize,
    pub seed: u64,
    pub options: LogicalOptions,
}

impl Default for LogicalConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            dim: None,
            random_states: 100,
            seed: 0,
            options: LogicalOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: Option<PathBuf>,
    pub kappa: KappaConfig,
    pub codewords: CodewordConfig,
    pub lyapunov: LyapunovConfig,
    pub qec_sim: ErrorRateConfig,
    pub check: VerificationConfig,
    pub logical_ops: LogicalConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Parses `a,b,c` or `start:end:count` (inclusive, evenly spaced) into a
/// non-empty list of values in `(0, 1]`.
pub fn parse_epsilons(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Config(format!("malformed epsilon range '{spec}': {why}"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        let [start, end, count] = parts.as_slice() else {
            return Err(bad("expected start:end:count"));
        };
        let start: f64 = start.parse().map_err(|_| bad("start is not a number"))?;
        let end: f64 = end.parse().map_err(|_| bad("end is not a number"))?;
        let count: usize = count.parse().map_err(|_| bad("count is not an integer"))?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| bad("entry is not a number")))
            .collect::<CliResult<_>>()?
    };
    validate_epsilons(&values)?;
    Ok(values)
}

pub fn validate_epsilons(values: &[f64]) -> CliResult<()> {
    if values.is_empty() {
        return Err(CliError::Config("empty epsilon range".into()));
    }
    if let Some(bad) = values.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(CliError::Config(format!("epsilon {bad} outside (0, 1]")));
    }
    Ok(())
}

pub fn require_positive(name: &str, value: f64) -> CliResult<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {value}")))
    }
}

pub fn require_dim(dim: Option<usize>) -> CliResult<()> {
    match dim {
        Some(d) if d < 2 => Err(CliError::Config(format!("dimension override {d} is below 2"))),
        _ => Ok(()),
    }
}

pub fn gate_long_running(epsilon: f64, long_running: bool) -> CliResult<()> {
    if epsilon <= LONG_RUNNING_EPSILON && !long_running {
        return Err(CliError::Config(format!(
            "epsilon = {epsilon} is a long-running experiment; pass --long-running"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_list_and_range() {
        assert_eq!(parse_epsilons("0.001, 0.01,0.1").unwrap(), vec![0.001, 0.01, 0.1]);
        assert_eq!(parse_epsilons("0.1:0.2:3").unwrap().len(), 3);
        assert!(parse_epsilons("").is_err());
        assert!(parse_epsilons("0.1:0.2:0").is_err());
        assert!(parse_epsilons("0.1:0.2").is_err());
        assert!(parse_epsilons("0,0.1").is_err());
        assert!(parse_epsilons("1.5").is_err());
        assert!(parse_epsilons("x").is_err());
    }

    #[test]
    fn default_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_sections_fill_defaults() {
        let cfg = RunConfig::parse("[qec_sim]\nepsilon = 0.2\n[lyapunov]\nn_trials = 3\n").unwrap();
        assert_eq!(cfg.qec_sim.epsilon, 0.2);
        assert_eq!(cfg.qec_sim.record_points, ErrorRateConfig::default().record_points);
        assert_eq!(cfg.lyapunov.n_trials, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("[qec_sim]\nepsilom = 0.2\n").is_err());
    }

    #[test]
    fn long_running_gate() {
        assert!(gate_long_running(0.05, false).is_err());
        assert!(gate_long_running(0.05, true).is_ok());
        assert!(gate_long_running(0.1, false).is_ok());
    }
}
