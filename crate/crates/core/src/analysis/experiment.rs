//! Logical error rate under photon loss with and without the stabilizing
//! dissipation.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::fit::log_slope;
use crate::code::{default_dim, GkpCode, GkpParameters, ETA_SQUARE};
use crate::error::{Error, Result};
use crate::lindblad::{
    evolve, logical_operators, DensityMatrix, LindbladModel, LogicalOptions, NoiseKind,
    ObservableSpec, Record, SolverOptions, SolverStats,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorRateConfig {
    pub epsilon: f64,
    /// Defaults to the truncation rule.
    pub dim: Option<usize>,
    /// Photon-loss rate; defaults to `epsilon / 5`.
    pub kappa1: Option<f64>,
    /// Final time; defaults to `1 / kappa1`. Required when `kappa1 = 0`.
    pub t_final: Option<f64>,
    pub record_points: usize,
    /// Dimensions above this are refused.
    pub max_dim: usize,
    /// Defaults to [`ErrorRateConfig::default_solver`].
    pub solver: SolverOptions,
    pub logical: LogicalOptions,
}

impl Default for ErrorRateConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            dim: None,
            kappa1: None,
            t_final: None,
            record_points: 100,
            max_dim: 600,
            solver: Self::default_solver(),
            logical: LogicalOptions::default(),
        }
    }
}

impl ErrorRateConfig {
    /// Tighter tolerances without the per-unit-time trace control, which
    /// would cost several times more steps over `1 / kappa1`.
    pub fn default_solver() -> SolverOptions {
        SolverOptions {
            trace_drift_rate: 0.0,
            ..SolverOptions::default().with_tolerances(1e-10, 1e-12)
        }
    }

    pub fn resolved_dim(&self) -> usize {
        self.dim.unwrap_or_else(|| default_dim(self.epsilon))
    }

    pub fn resolved_kappa1(&self) -> f64 {
        self.kappa1.unwrap_or(self.epsilon / 5.0)
    }

    pub fn resolved_t_final(&self) -> Result<f64> {
        match (self.t_final, self.resolved_kappa1()) {
            (Some(t), _) if t > 0.0 && t.is_finite() => Ok(t),
            (Some(t), _) => Err(Error::InvalidInput(format!("invalid final time {t}"))),
            (None, k) if k > 0.0 => Ok(1.0 / k),
            (None, _) => Err(Error::InvalidInput(
                "a final time is required when the loss rate is zero".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub epsilon: f64,
    pub dim: usize,
    pub kappa1: f64,
    pub t_final: f64,
    /// `kappa1 (1 - Tr(J_z rho_on(t_final)))`
    pub on_rate: f64,
    /// `kappa1 (1 - Tr(J_z rho_off(t_final)))`
    pub off_rate: f64,
    /// `off_rate / on_rate`; `None` when `on_rate` is not positive.
    pub suppression_ratio: Option<f64>,
    /// `-d ln Tr(J_z rho) / dt` fitted over the whole record grid.
    pub on_fitted_rate: Option<f64>,
    pub off_fitted_rate: Option<f64>,
    /// Largest residual of the noiseless logical operators.
    pub logical_residual: f64,
    pub on_records: Vec<Record>,
    pub off_records: Vec<Record>,
    pub on_stats: SolverStats,
    pub off_stats: SolverStats,
    pub positivity_warnings: usize,
    pub runtime_seconds: f64,
}

fn jz_series(records: &[Record]) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter_map(|r| r.bloch.map(|b| (r.t, b[2])))
        .collect()
}

fn final_jz(records: &[Record]) -> Result<f64> {
    records
        .last()
        .and_then(|r| r.bloch)
        .map(|b| b[2])
        .ok_or_else(|| Error::Verification("trajectory has no Bloch record".into()))
}

/// Runs the "on" model (four dissipators plus photon loss) and the "off"
/// model (photon loss only) from `|0><0|` and scores both against the logical
/// operators of the noiseless model.
pub fn error_rate_experiment(config: &ErrorRateConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let dim = config.resolved_dim();
    if dim > config.max_dim {
        return Err(Error::Resource(format!(
            "dimension {dim} exceeds the configured maximum {}; use a larger epsilon or raise the limit",
            config.max_dim
        )));
    }
    let kappa1 = config.resolved_kappa1();
    if !(kappa1 >= 0.0 && kappa1.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid loss rate {kappa1}")));
    }
    let t_final = config.resolved_t_final()?;
    if config.record_points < 2 {
        return Err(Error::InvalidInput("at least two record points are required".into()));
    }

    let code = GkpCode::build(GkpParameters::with_dim(config.epsilon, ETA_SQUARE, dim)?)?;
    let noiseless = LindbladModel::gkp(&code)?;
    let logical = match logical_operators(&noiseless, &code, &config.logical) {
        Ok(ops) => ops,
        Err(Error::NonConvergence { operators, .. }) => {
            log::warn!(
                "logical-operator residual {:.3e} above tolerance {:.1e}",
                operators.convergence_residual,
                config.logical.tol
            );
            *operators
        }
        Err(e) => return Err(e),
    };
    let logical_residual = logical.convergence_residual;

    let on = noiseless.with_noise(NoiseKind::PhotonLoss, kappa1)?;
    let mut off = LindbladModel::new(dim)?;
    if kappa1 > 0.0 {
        off = off.with_noise(NoiseKind::PhotonLoss, kappa1)?;
    }
    let rho0 = DensityMatrix::pure(&code.codewords[0])?;
    let spec = ObservableSpec::uniform(t_final, config.record_points)
        .with_lyapunov(code.lyapunov.clone())
        .with_logical(logical)
        .with_photon_number();

    let runs: Vec<Result<crate::lindblad::Trajectory>> =
        crate::exec::map_items(&[&on, &off], |m| evolve(m, &rho0, &config.solver, &spec));
    let mut runs = runs.into_iter();
    let on_traj = runs.next().expect("two runs")?;
    let off_traj = runs.next().expect("two runs")?;

    let on_rate = kappa1 * (1.0 - final_jz(&on_traj.records)?);
    let off_rate = kappa1 * (1.0 - final_jz(&off_traj.records)?);
    let suppression_ratio = if on_rate > 0.0 { Some(off_rate / on_rate) } else { None };
    let fit = |r: &[Record]| log_slope(&jz_series(r), 0.0, t_final).map(|s| -s);
    Ok(ExperimentReport {
        epsilon: config.epsilon,
        dim,
        kappa1,
        t_final,
        on_rate,
        off_rate,
        suppression_ratio,
        on_fitted_rate: fit(&on_traj.records),
        off_fitted_rate: fit(&off_traj.records),
        logical_residual,
        positivity_warnings: on_traj.positivity_warnings.len() + off_traj.positivity_warnings.len(),
        on_records: on_traj.records,
        off_records: off_traj.records,
        on_stats: on_traj.stats,
        off_stats: off_traj.stats,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub dims: [usize; 2],
    pub on_rates: [f64; 2],
    pub off_rates: [f64; 2],
    /// `|on_rate(1.5 dim) - on_rate(dim)| / on_rate(1.5 dim)`.
    pub relative_change: f64,
}

/// Repeats the experiment at `1.5 dim` to test the truncation rule.
pub fn truncation_convergence(config: &ErrorRateConfig) -> Result<TruncationReport> {
    let base = config.resolved_dim();
    let larger = (base * 3).div_ceil(2);
    let a = error_rate_experiment(&ErrorRateConfig {
        dim: Some(base),
        ..config.clone()
    })?;
    let b = error_rate_experiment(&ErrorRateConfig {
        dim: Some(larger),
        ..config.clone()
    })?;
    Ok(TruncationReport {
        dims: [base, larger],
        on_rates: [a.on_rate, b.on_rate],
        off_rates: [a.off_rate, b.off_rate],
        relative_change: (b.on_rate - a.on_rate).abs() / b.on_rate.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resource_limit_enforced() {
        let cfg = ErrorRateConfig {
            epsilon: 1.0 / 30.0,
            max_dim: 400,
            ..ErrorRateConfig::default()
        };
        assert!(matches!(error_rate_experiment(&cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn zero_loss_needs_final_time() {
        let cfg = ErrorRateConfig {
            kappa1: Some(0.0),
            ..ErrorRateConfig::default()
        };
        assert!(cfg.resolved_t_final().is_err());
        assert_eq!(ErrorRateConfig::default().resolved_t_final().unwrap(), 50.0);
    }

    #[test]
    fn no_loss_keeps_logical_state() {
        let cfg = ErrorRateConfig {
            epsilon: 0.14,
            kappa1: Some(0.0),
            t_final: Some(2.0),
            record_points: 4,
            ..ErrorRateConfig::default()
        };
        let r = error_rate_experiment(&cfg).unwrap();
        for rec in &r.on_records {
            assert!((rec.bloch.unwrap()[2] - 1.0).abs() < 1e-5, "{rec:?}");
        }
        assert_eq!(r.on_rate, 0.0);
        assert!(r.suppression_ratio.is_none());
    }
}
