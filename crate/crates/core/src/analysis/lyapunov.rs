//! Decay of `Tr(W rho(t))` under the four stabilizing dissipators.

use serde::{Deserialize, Serialize};

use crate::analysis::fit::log_slope;
use crate::code::{GkpCode, GkpParameters};
use crate::error::{Error, Result};
use crate::exec::map_items;
use crate::lindblad::{evolve, DensityMatrix, LindbladModel, ObservableSpec, SolverOptions};
use crate::random::{random_density_matrix, rng_for, GinibreSpec};

/// Initial states of the decay trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `n_trials` seeded Ginibre states.
    #[default]
    Random,
    /// The single codeword `|0><0|`, which starts in the kernel of `W`.
    Codeword,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    pub epsilon: f64,
    pub eta: f64,
    /// Defaults to the truncation rule.
    pub dim: Option<usize>,
    pub initial: InitialState,
    pub n_trials: usize,
    pub seed: u64,
    /// Horizon in units of `1 / kappa`.
    pub horizon_multiplier: f64,
    /// Fit window as fractions of the horizon.
    pub window: (f64, f64),
    pub record_points: usize,
    /// Random states with `Tr(W rho) <= min_initial_lyapunov` are redrawn.
    pub min_initial_lyapunov: f64,
    /// Trials starting at or below this value are reported as degenerate.
    pub degenerate_threshold: f64,
    /// Accepted shortfall of the fitted rate below `kappa`.
    pub rate_tolerance: f64,
    pub solver: SolverOptions,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            eta: crate::code::ETA_SQUARE,
            dim: None,
            initial: InitialState::Random,
            n_trials: 10,
            seed: 0,
            horizon_multiplier: 5.0,
            window: (0.1, 1.0),
            record_points: 100,
            min_initial_lyapunov: 1e-4,
            degenerate_threshold: 1e-8,
            rate_tolerance: 0.05,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: usize,
    pub initial_lyapunov: f64,
    pub degenerate: bool,
    pub fitted_rate: Option<f64>,
    /// `max_t Tr(W rho(t)) / (Tr(W rho(0)) e^{-kappa t})`.
    pub bound_ratio: Option<f64>,
    pub max_trace_error: Option<f64>,
    pub accepted_steps: usize,
    /// `(t, Tr(W rho(t)))` on the record grid.
    pub series: Vec<(f64, f64)>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub epsilon: f64,
    pub eta: f64,
    pub dim: usize,
    pub kappa: f64,
    pub certified: bool,
    pub horizon: f64,
    pub trials: Vec<TrialOutcome>,
    pub min_rate: Option<f64>,
    pub median_rate: Option<f64>,
    pub passed: bool,
}

impl LyapunovConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        let ok = self.horizon_multiplier > 0.0
            && (0.0..1.0).contains(&lo)
            && hi > lo
            && hi <= 1.0
            && self.record_points >= 2
            && self.rate_tolerance >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid Lyapunov experiment configuration {self:?}")))
        }
    }
}

/// Seeded Ginibre states on the lowest `dim / 4` levels whose initial
/// `Tr(W rho)` exceeds `config.min_initial_lyapunov`.
pub fn random_initial_states(code: &GkpCode, config: &LyapunovConfig) -> Result<Vec<DensityMatrix>> {
    let spec = GinibreSpec::truncation_safe(code.dim());
    (0..config.n_trials)
        .map(|k| {
            let mut rng = rng_for(config.seed, k as u64);
            for _ in 0..1000 {
                let rho = random_density_matrix(&spec, &mut rng)?;
                if code.lyapunov.trace_product(rho.matrix())?.re > config.min_initial_lyapunov {
                    return Ok(rho);
                }
            }
            Err(Error::InvalidInput("no random state met the Lyapunov threshold".into()))
        })
        .collect()
}

fn run_trial(
    index: usize,
    code: &GkpCode,
    model: &LindbladModel,
    rho0: &DensityMatrix,
    config: &LyapunovConfig,
    kappa: f64,
    horizon: f64,
) -> TrialOutcome {
    let initial = code
        .lyapunov
        .trace_product(rho0.matrix())
        .map(|z| z.re)
        .unwrap_or(f64::NAN);
    let mut outcome = TrialOutcome {
        index,
        initial_lyapunov: initial,
        degenerate: false,
        fitted_rate: None,
        bound_ratio: None,
        max_trace_error: None,
        accepted_steps: 0,
        series: Vec::new(),
        error: None,
    };
    if initial <= config.degenerate_threshold {
        log::info!("trial {index}: Tr(W rho0) = {initial:.3e}, degenerate");
        outcome.degenerate = true;
        return outcome;
    }
    let spec = ObservableSpec::uniform(horizon, config.record_points).with_lyapunov(code.lyapunov.clone());
    match evolve(model, rho0, &config.solver, &spec) {
        Ok(traj) => {
            outcome.series = traj
                .records
                .iter()
                .map(|r| (r.t, r.lyapunov.unwrap_or(f64::NAN)))
                .collect();
            let (lo, hi) = config.window;
            outcome.fitted_rate = log_slope(&outcome.series, lo * horizon, hi * horizon).map(|s| -s);
            outcome.bound_ratio = Some(
                outcome
                    .series
                    .iter()
                    .map(|&(t, w)| w / (initial * (-kappa * t).exp()))
                    .fold(0.0, f64::max),
            );
            outcome.max_trace_error = Some(traj.max_trace_error());
            outcome.accepted_steps = traj.stats.accepted;
        }
        Err(e) => outcome.error = Some(e.to_string()),
    }
    outcome
}

/// Evolves each given state under the four dissipators and fits the decay
/// rate of `Tr(W rho(t))` on the configured window.
pub fn lyapunov_decay_trials(
    code: &GkpCode,
    states: &[DensityMatrix],
    config: &LyapunovConfig,
) -> Result<LyapunovReport> {
    config.validate()?;
    let kappa = code.kappa();
    if !(kappa.value > 0.0) {
        return Err(Error::InvalidInput(format!(
            "kappa = {:.3e} is not positive; the decay horizon is undefined",
            kappa.value
        )));
    }
    if !kappa.certified {
        log::warn!("epsilon = {} is outside the certified regime", code.params.epsilon);
    }
    let model = LindbladModel::gkp(code)?;
    let horizon = config.horizon_multiplier / kappa.value;
    let indexed: Vec<(usize, &DensityMatrix)> = states.iter().enumerate().collect();
    let trials = map_items(&indexed, |&(k, rho)| run_trial(k, code, &model, rho, config, kappa.value, horizon));

    let mut rates: Vec<f64> = trials.iter().filter_map(|t| t.fitted_rate).collect();
    rates.sort_by(f64::total_cmp);
    let min_rate = rates.first().copied();
    let median_rate = if rates.is_empty() {
        None
    } else {
        let n = rates.len();
        Some(if n % 2 == 1 { rates[n / 2] } else { 0.5 * (rates[n / 2 - 1] + rates[n / 2]) })
    };
    let threshold = kappa.value * (1.0 - config.rate_tolerance);
    let passed = trials.iter().all(|t| {
        t.degenerate || (t.error.is_none() && t.fitted_rate.is_some_and(|r| r >= threshold))
    });
    Ok(LyapunovReport {
        epsilon: code.params.epsilon,
        eta: code.params.eta,
        dim: code.dim(),
        kappa: kappa.value,
        certified: kappa.certified,
        horizon,
        trials,
        min_rate,
        median_rate,
        passed,
    })
}

/// Builds the code, prepares the configured initial states and runs the
/// decay trials.
pub fn lyapunov_decay_experiment(config: &LyapunovConfig) -> Result<LyapunovReport> {
    config.validate()?;
    let params = match config.dim {
        Some(d) => GkpParameters::with_dim(config.epsilon, config.eta, d)?,
        None => GkpParameters::new(config.epsilon, config.eta)?,
    };
    let code = GkpCode::build(params)?;
    let states = match config.initial {
        InitialState::Random => random_initial_states(&code, config)?,
        InitialState::Codeword => vec![DensityMatrix::pure(&code.codewords[0])?],
    };
    lyapunov_decay_trials(&code, &states, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::ETA_SQUARE;

    fn small_config() -> LyapunovConfig {
        LyapunovConfig {
            epsilon: 0.14,
            dim: None,
            n_trials: 2,
            seed: 11,
            record_points: 40,
            ..LyapunovConfig::default()
        }
    }

    #[test]
    fn codespace_state_is_degenerate() {
        let cfg = small_config();
        let code = GkpCode::build(GkpParameters::new(0.14, ETA_SQUARE).unwrap()).unwrap();
        let rho = DensityMatrix::pure(&code.codewords[0]).unwrap();
        let report = lyapunov_decay_trials(&code, &[rho], &cfg).unwrap();
        assert!(report.trials[0].degenerate);
        assert!(report.passed);
        assert!(report.min_rate.is_none());
    }

    #[test]
    fn random_states_meet_threshold_and_are_reproducible() {
        let cfg = small_config();
        let code = GkpCode::build(GkpParameters::new(0.14, ETA_SQUARE).unwrap()).unwrap();
        let a = random_initial_states(&code, &cfg).unwrap();
        let b = random_initial_states(&code, &cfg).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.matrix(), y.matrix());
            assert!(code.lyapunov.trace_product(x.matrix()).unwrap().re > 1e-4);
        }
    }

    #[test]
    fn codeword_configuration_runs_one_degenerate_trial() {
        let cfg = LyapunovConfig {
            initial: InitialState::Codeword,
            ..small_config()
        };
        let report = lyapunov_decay_experiment(&cfg).unwrap();
        assert_eq!(report.trials.len(), 1);
        assert!(report.trials[0].degenerate && report.passed);
    }

    #[test]
    fn invalid_window_rejected() {
        let cfg = LyapunovConfig {
            window: (0.5, 0.2),
            ..small_config()
        };
        assert!(lyapunov_decay_experiment(&cfg).is_err());
    }
}
