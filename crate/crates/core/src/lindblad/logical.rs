//! Steady-state logical observables `J_xi = lim_{t->inf} exp(t L*)(S_xi)`.

use serde::{Deserialize, Serialize};

use crate::code::GkpCode;
use crate::error::{Error, Result};
use crate::fock::TruncatedOperator;
use crate::lindblad::density::DensityMatrix;
use crate::lindblad::integrate::{Direction, Propagator, Scheme, SolverOptions, Stepper};
use ndarray::{Array2, Zip};
use crate::lindblad::model::LindbladModel;

/// Jump-chain sweeps without a 1% residual improvement before giving up.
const STALL_WINDOW: usize = 200;

/// Largest accepted imaginary part of a Bloch coordinate.
pub const BLOCH_IMAG_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct LogicalOperators {
    pub jx: TruncatedOperator,
    pub jy: TruncatedOperator,
    pub jz: TruncatedOperator,
    /// `max_xi ||L*(J_xi)||_F / ||J_xi||_F` at the stopping time.
    pub convergence_residual: f64,
    /// Adjoint integration time actually used.
    pub horizon: f64,
    /// Largest jump-chain iteration count over the three components.
    pub iterations: usize,
}

impl LogicalOperators {
    pub fn components(&self) -> [&TruncatedOperator; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    pub fn dim(&self) -> usize {
        self.jx.dim()
    }
}

/// How the Heisenberg-picture limit is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogicalMethod {
    /// Fixed-point iteration of the embedded jump chain
    /// `X <- (G X + X G)^{-1} sum_k gamma_k L_k^dagger X L_k`, holding the
    /// block on the kernel of `G` at its initial value.
    #[default]
    JumpChain,
    /// Adaptive time integration of `dX/dt = L*(X)`.
    Integrate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogicalOptions {
    pub method: LogicalMethod,
    /// Fallback horizon in units of `1 / kappa`.
    pub horizon_multiplier: f64,
    /// Relative residual `||L*(X)||_F / ||X||_F` that stops the integration.
    pub tol: f64,
    /// Residual checks per `1 / kappa` of integration time.
    pub checks_per_rate: f64,
    /// Iteration cap for [`LogicalMethod::JumpChain`].
    pub max_iterations: usize,
    /// Eigenvalues `2 g_k` of `2 G` at or below this value span the fixed block.
    pub kernel_tol: f64,
    pub solver: SolverOptions,
}

impl Default for LogicalOptions {
    fn default() -> Self {
        Self {
            method: LogicalMethod::JumpChain,
            horizon_multiplier: 20.0,
            tol: 1e-8,
            checks_per_rate: 1.0,
            max_iterations: 20_000,
            kernel_tol: 1e-4,
            solver: SolverOptions::default(),
        }
    }
}

fn frobenius(x: &Array2<crate::C64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Heisenberg-picture limit of one observable.
#[derive(Clone, Debug)]
pub struct SteadyObservable {
    pub operator: TruncatedOperator,
    pub residual: f64,
    /// Adjoint integration time actually used; zero for the jump chain.
    pub time: f64,
    /// Jump-chain iterations; zero for time integration.
    pub iterations: usize,
}

fn check_options(kappa: f64, opts: &LogicalOptions) -> Result<()> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!(
            "convergence rate bound kappa = {kappa:.3e} is not positive; no horizon available"
        )));
    }
    if !(opts.horizon_multiplier > 0.0
        && opts.tol > 0.0
        && opts.checks_per_rate > 0.0
        && opts.kernel_tol >= 0.0
        && opts.max_iterations > 0)
    {
        return Err(Error::InvalidInput("invalid logical-operator options".into()));
    }
    Ok(())
}

/// Heisenberg-picture limit of `source`, computed with `opts.method`.
///
/// Time integration runs until the relative residual `||L*(X)||_F / ||X||_F`
/// drops below `opts.tol` or `t` reaches `opts.horizon_multiplier / kappa`.
/// The jump chain stops on the same residual rule, after
/// `opts.max_iterations` sweeps, or once the residual stalls. The result is symmetrized and returned
/// whether or not the residual rule was met.
pub fn steady_observable(
    model: &LindbladModel,
    source: &TruncatedOperator,
    kappa: f64,
    opts: &LogicalOptions,
) -> Result<SteadyObservable> {
    check_options(kappa, opts)?;
    if source.dim() != model.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            found: source.dim(),
        });
    }
    match opts.method {
        LogicalMethod::JumpChain => jump_chain(model, source, opts),
        LogicalMethod::Integrate => integrate(model, source, kappa, opts),
    }
}

fn integrate(
    model: &LindbladModel,
    source: &TruncatedOperator,
    kappa: f64,
    opts: &LogicalOptions,
) -> Result<SteadyObservable> {
    let horizon = opts.horizon_multiplier / kappa;
    let chunk = 1.0 / (kappa * opts.checks_per_rate);
    let prop = Propagator::new(model, opts.solver.scheme, Direction::Adjoint)?;
    let mut stepper = Stepper::new(&prop, opts.solver)?;
    let mut y = prop.to_working(source.as_array());
    let mut t = 0.0;
    let mut residual = frobenius(&prop.full_rhs(&y)) / frobenius(&y);
    while residual > opts.tol && t < horizon {
        let next = (t + chunk).min(horizon);
        stepper.advance(&mut y, t, next)?;
        t = next;
        residual = frobenius(&prop.full_rhs(&y)) / frobenius(&y);
    }
    let operator = TruncatedOperator::from_array_unchecked(prop.from_working(&y)).hermitian_part();
    Ok(SteadyObservable {
        operator,
        residual,
        time: t,
        iterations: 0,
    })
}

fn jump_chain(
    model: &LindbladModel,
    source: &TruncatedOperator,
    opts: &LogicalOptions,
) -> Result<SteadyObservable> {
    let prop = Propagator::new(model, Scheme::Lawson, Direction::Adjoint)?;
    let rates = prop
        .decay_rates()
        .ok_or_else(|| Error::InvalidInput("jump chain needs the eigenbasis of G".into()))?;
    let n = prop.dim();
    let fixed: Vec<bool> = (0..n).map(|k| rates[[k, k]] <= opts.kernel_tol).collect();
    let start = prop.to_working(source.as_array());
    let mut x = start.clone();
    let mut iterations = 0;
    let mut best = (f64::INFINITY, 0);
    let residual = loop {
        let y = prop.jump(&x);
        let defect: f64 = Zip::from(&y)
            .and(&x)
            .and(rates)
            .fold(0.0, |acc, &yi, &xi, &r| acc + (yi - xi * r).norm_sqr());
        let residual = defect.sqrt() / frobenius(&x);
        if residual < 0.99 * best.0 {
            best = (residual, iterations);
        }
        let stalled = iterations >= best.1 + STALL_WINDOW;
        if residual <= opts.tol
            || iterations >= opts.max_iterations
            || stalled
            || !residual.is_finite()
        {
            break residual;
        }
        x = Array2::from_shape_fn((n, n), |(k, l)| {
            if fixed[k] && fixed[l] {
                start[[k, l]]
            } else {
                y[[k, l]] / rates[[k, l]]
            }
        });
        iterations += 1;
    };
    if !residual.is_finite() {
        return Err(Error::Verification("jump-chain iteration diverged".into()));
    }
    let operator = TruncatedOperator::from_array_unchecked(prop.from_working(&x)).hermitian_part();
    Ok(SteadyObservable {
        operator,
        residual,
        time: 0.0,
        iterations,
    })
}

/// Heisenberg-picture limits of `S_x, S_y, S_z` via [`steady_observable`]. Non-convergence is reported as [`Error::NonConvergence`], which
/// still carries the operators.
pub fn logical_operators(
    model: &LindbladModel,
    code: &GkpCode,
    opts: &LogicalOptions,
) -> Result<LogicalOperators> {
    if model.dim() != code.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            found: code.dim(),
        });
    }
    let basis = code.logical_basis()?;
    let kappa = code.kappa().value;
    check_options(kappa, opts)?;
    let sources = [&basis.sx, &basis.sy, &basis.sz];
    let results: Vec<Result<SteadyObservable>> =
        crate::exec::map_items(&sources, |s| steady_observable(model, s, kappa, opts));
    let mut ops = Vec::with_capacity(3);
    let mut residual = 0.0f64;
    let mut used = 0.0f64;
    let mut iterations = 0;
    for r in results {
        let r = r?;
        iterations = iterations.max(r.iterations);
        residual = residual.max(r.residual);
        used = used.max(r.time);
        ops.push(r.operator);
    }
    let jz = ops.pop().unwrap();
    let jy = ops.pop().unwrap();
    let jx = ops.pop().unwrap();
    let out = LogicalOperators {
        jx,
        jy,
        jz,
        convergence_residual: residual,
        horizon: used,
        iterations,
    };
    if residual > opts.tol {
        return Err(Error::NonConvergence {
            residual,
            tol: opts.tol,
            operators: Box::new(out),
        });
    }
    Ok(out)
}

/// `(Tr(J_x rho), Tr(J_y rho), Tr(J_z rho))`.
pub fn bloch_coordinates(j: &LogicalOperators, rho: &DensityMatrix) -> Result<[f64; 3]> {
    bloch_of_operator(j, rho.matrix())
}

pub fn bloch_of_operator(j: &LogicalOperators, rho: &TruncatedOperator) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (k, op) in j.components().iter().enumerate() {
        let v = op.trace_product(rho)?;
        if v.im.abs() > BLOCH_IMAG_TOL {
            return Err(Error::Verification(format!(
                "Bloch coordinate {k} has imaginary part {:.3e}",
                v.im
            )));
        }
        out[k] = v.re;
    }
    Ok(out)
}
