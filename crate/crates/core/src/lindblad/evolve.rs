use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{make_number, TruncatedOperator};
use crate::lindblad::density::DensityMatrix;
use crate::lindblad::integrate::{Direction, Propagator, SolverOptions, SolverStats, Stepper};
use crate::lindblad::logical::LogicalOperators;
use crate::lindblad::model::LindbladModel;
use crate::spectral::hermitian_eigenvalues;

/// Minimum eigenvalue below which a record point raises a positivity warning.
pub const POSITIVITY_WARNING: f64 = -1e-6;

/// What to record along a trajectory.
#[derive(Clone, Debug, Default)]
pub struct ObservableSpec {
    /// Output grid, strictly increasing, starting at or after 0.
    pub times: Vec<f64>,
    /// Records `Tr(W rho)` when set.
    pub lyapunov: Option<TruncatedOperator>,
    /// Records Bloch coordinates `Tr(J_xi rho)` when set.
    pub logical: Option<LogicalOperators>,
    pub photon_number: bool,
    /// Records the minimum eigenvalue of `rho` (one eigensolve per record).
    pub positivity: bool,
    /// Grid times (exact matches) at which the full state is stored.
    pub snapshot_times: Vec<f64>,
}

impl ObservableSpec {
    /// `count + 1` evenly spaced points on `[0, t_final]`.
    pub fn uniform(t_final: f64, count: usize) -> Self {
        let count = count.max(1);
        let times = (0..=count)
            .map(|k| t_final * k as f64 / count as f64)
            .collect();
        Self {
            times,
            ..Self::default()
        }
    }

    pub fn with_lyapunov(mut self, w: TruncatedOperator) -> Self {
        self.lyapunov = Some(w);
        self
    }

    pub fn with_logical(mut self, j: LogicalOperators) -> Self {
        self.logical = Some(j);
        self
    }

    pub fn with_photon_number(mut self) -> Self {
        self.photon_number = true;
        self
    }

    pub fn with_positivity(mut self) -> Self {
        self.positivity = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub trace: f64,
    pub lyapunov: Option<f64>,
    pub bloch: Option<[f64; 3]>,
    pub photon_number: Option<f64>,
    pub min_eigenvalue: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub snapshots: Vec<(f64, TruncatedOperator)>,
    pub final_state: TruncatedOperator,
    pub stats: SolverStats,
    /// Record times whose minimum eigenvalue fell below [`POSITIVITY_WARNING`].
    pub positivity_warnings: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (r.trace - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("trajectory has at least one record")
    }
}

fn trace_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    // Tr(A B) = sum_kl A_kl B_lk
    let mut acc = C64::new(0.0, 0.0);
    for ((k, l), x) in a.indexed_iter() {
        acc += x * b[(l, k)];
    }
    acc
}

fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("observable grid is empty".into()));
    }
    if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("observable grid must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("observable grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Integrates `d rho/dt = L(rho)` from `rho0` at `t = 0` and records the
/// requested observables at every grid time.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    solver: &SolverOptions,
    record: &ObservableSpec,
) -> Result<Trajectory> {
    if rho0.dim() != model.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    validate_grid(&record.times)?;
    let prop = Propagator::new(model, solver.scheme, Direction::Forward)?;
    let mut stepper = Stepper::new(&prop, *solver)?;

    let dim = model.dim();
    let w = record.lyapunov.as_ref().map(|w| prop.to_working(w.as_array()));
    let js = record.logical.as_ref().map(|j| {
        [
            prop.to_working(j.jx.as_array()),
            prop.to_working(j.jy.as_array()),
            prop.to_working(j.jz.as_array()),
        ]
    });
    let number = if record.photon_number {
        Some(prop.to_working(make_number(dim)?.as_array()))
    } else {
        None
    };
    for op in [&record.lyapunov]
        .into_iter()
        .flatten()
        .chain(record.logical.iter().flat_map(|j| [&j.jx, &j.jy, &j.jz]))
    {
        if op.dim() != dim {
            return Err(Error::Shape {
                expected: dim,
                found: op.dim(),
            });
        }
    }

    let mut y = prop.to_working(rho0.matrix().as_array());
    let mut t = 0.0;
    let mut records = Vec::with_capacity(record.times.len());
    let mut snapshots = Vec::new();
    let mut warnings = Vec::new();
    for &target in &record.times {
        stepper.advance(&mut y, t, target)?;
        t = target;
        let trace = y.diag().sum().re;
        let lyapunov = w.as_ref().map(|w| trace_product(w, &y).re);
        let bloch = match &js {
            Some(js) => {
                let mut b = [0.0; 3];
                for (k, j) in js.iter().enumerate() {
                    b[k] = trace_product(j, &y).re;
                }
                Some(b)
            }
            None => None,
        };
        let photon_number = number.as_ref().map(|n| trace_product(n, &y).re);
        let min_eigenvalue = if record.positivity {
            let m = hermitian_eigenvalues(&y)?[0];
            if m < POSITIVITY_WARNING {
                log::warn!("density matrix min eigenvalue {m:.3e} at t = {t:.6e}");
                warnings.push(t);
            }
            Some(m)
        } else {
            None
        };
        records.push(Record {
            t,
            trace,
            lyapunov,
            bloch,
            photon_number,
            min_eigenvalue,
        });
        if record.snapshot_times.contains(&t) {
            snapshots.push((t, TruncatedOperator::from_array_unchecked(prop.from_working(&y))));
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_state: TruncatedOperator::from_array_unchecked(prop.from_working(&y)),
        stats: stepper.stats,
        positivity_warnings: warnings,
    })
}

/// Integrates the adjoint equation `dX/dt = L*(X)` up to `t_final`.
pub fn evolve_adjoint(
    model: &LindbladModel,
    x0: &TruncatedOperator,
    t_final: f64,
    solver: &SolverOptions,
) -> Result<TruncatedOperator> {
    if x0.dim() != model.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            found: x0.dim(),
        });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid final time {t_final}")));
    }
    let prop = Propagator::new(model, solver.scheme, Direction::Adjoint)?;
    let mut stepper = Stepper::new(&prop, *solver)?;
    let mut y = prop.to_working(x0.as_array());
    stepper.advance(&mut y, 0.0, t_final)?;
    Ok(TruncatedOperator::from_array_unchecked(prop.from_working(&y)))
}
