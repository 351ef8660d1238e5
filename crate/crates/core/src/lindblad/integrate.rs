//! Adaptive Dormand–Prince 5(4) time stepping on the matrix form of the
//! master equation (or its adjoint), never on the vectorized superoperator.
//!
//! The generator splits as `X' = J(X) - (G X + X G)` with the jump map
//! `J(X) = sum_c rate_c L_c X L_c^dagger` (adjoint: `L_c^dagger X L_c`) and the
//! Hermitian `G = (1/2) sum_c rate_c L_c^dagger L_c`. The exponentiated GKP
//! dissipators make `G` very stiff (its spectrum spans several decades), so
//! the default [`Scheme::Lawson`] treats the anticommutator part exactly: in
//! the eigenbasis of `G` it is the elementwise decay
//! `X_kl -> exp(-t (g_k + g_l)) X_kl`, and the Dormand–Prince tableau is
//! applied to the remaining jump term (integrating-factor Runge–Kutta).
//! [`Scheme::Explicit`] is the plain tableau on the full right-hand side.

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::symmetrize_in_place;
use crate::lindblad::model::LindbladModel;
use crate::spectral::HermitianEigen;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Integrating-factor Dormand–Prince in the eigenbasis of `G`.
    Lawson,
    /// Classical explicit Dormand–Prince; only practical for non-stiff models.
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial derivative when `None`.
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
    pub scheme: Scheme,
    /// Largest accepted trace change per unit time in the Schrödinger
    /// picture; zero disables the check.
    pub trace_drift_rate: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: None,
            min_step: 1e-12,
            max_steps: 2_000_000,
            scheme: Scheme::Lawson,
            trace_drift_rate: 5e-10,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol >= 0.0
            && self.min_step > 0.0
            && self.max_steps > 0
            && self.initial_step.is_none_or(|h| h > 0.0)
            && self.trace_drift_rate >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub jump_evaluations: usize,
    pub last_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// Schrödinger picture, `rho' = L(rho)`.
    Forward,
    /// Heisenberg picture, `X' = L*(X)`.
    Adjoint,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

struct JumpTerm {
    op: Array2<C64>,
    op_adj: Array2<C64>,
    rate: f64,
}

/// Master-equation right-hand side expressed in a fixed working basis.
pub(crate) struct Propagator {
    scheme: Scheme,
    direction: Direction,
    /// Columns are eigenvectors of `G`; `None` means the Fock basis.
    basis: Option<Array2<C64>>,
    /// `g_k + g_l` for the Lawson scheme.
    decay_rates: Option<Array2<f64>>,
    /// Eigenvalues `g_k` of `G` for the Lawson scheme.
    decay: Option<Array1<f64>>,
    /// `G` in the working basis, used by the explicit scheme.
    generator: Array2<C64>,
    jumps: Vec<JumpTerm>,
    dominant: (String, f64),
}

impl Propagator {
    pub(crate) fn new(model: &LindbladModel, scheme: Scheme, direction: Direction) -> Result<Self> {
        let dominant = model
            .dominant_channel()
            .map(|(l, n)| (l.to_string(), n))
            .unwrap_or_else(|| ("none".into(), 0.0));
        let (basis, decay_rates, decay) = match scheme {
            Scheme::Lawson => {
                let eig = HermitianEigen::new(model.generator())?;
                let g = eig.values;
                let rates = Array2::from_shape_fn((g.len(), g.len()), |(k, l)| g[k] + g[l]);
                (Some(eig.vectors), Some(rates), Some(g))
            }
            Scheme::Explicit => (None, None, None),
        };
        let mut p = Self {
            scheme,
            direction,
            basis,
            decay_rates,
            decay,
            generator: Array2::zeros((model.dim(), model.dim())),
            jumps: Vec::new(),
            dominant,
        };
        p.generator = p.to_working(model.generator().as_array());
        for c in model.channels() {
            if c.rate == 0.0 {
                continue;
            }
            let op = p.to_working(c.operator.as_array());
            let op_adj = op.t().mapv(|z| z.conj());
            p.jumps.push(JumpTerm {
                op,
                op_adj,
                rate: c.rate,
            });
        }
        Ok(p)
    }

    /// `g_k + g_l` in the eigenbasis of `G`, available for the Lawson scheme.
    pub(crate) fn decay_rates(&self) -> Option<&Array2<f64>> {
        self.decay_rates.as_ref()
    }

    pub(crate) fn dim(&self) -> usize {
        self.generator.nrows()
    }

    /// `U^dagger X U`
    pub(crate) fn to_working(&self, x: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Some(u) => u.t().mapv(|z| z.conj()).dot(&x.dot(u)),
            None => x.clone(),
        }
    }

    /// `U X U^dagger`
    pub(crate) fn from_working(&self, x: &Array2<C64>) -> Array2<C64> {
        match &self.basis {
            Some(u) => u.dot(&x.dot(&u.t().mapv(|z| z.conj()))),
            None => x.clone(),
        }
    }

    pub(crate) fn jump(&self, x: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::<C64>::zeros(x.raw_dim());
        for j in &self.jumps {
            let term = match self.direction {
                Direction::Forward => j.op.dot(x).dot(&j.op_adj),
                Direction::Adjoint => j.op_adj.dot(x).dot(&j.op),
            };
            out.scaled_add(C64::new(j.rate, 0.0), &term);
        }
        out
    }

    /// Part of the right-hand side integrated by the Runge–Kutta tableau.
    fn field(&self, x: &Array2<C64>) -> Array2<C64> {
        let mut f = self.jump(x);
        if self.scheme == Scheme::Explicit {
            let anti = self.generator.dot(x) + x.dot(&self.generator);
            f -= &anti;
        }
        f
    }

    /// Full generator applied to a working-basis operator.
    pub(crate) fn full_rhs(&self, x: &Array2<C64>) -> Array2<C64> {
        let mut f = self.jump(x);
        match &self.decay_rates {
            Some(rates) => {
                Zip::from(&mut f)
                    .and(x)
                    .and(rates)
                    .for_each(|fo, &xi, &r| *fo -= xi * r);
            }
            None => {
                let anti = self.generator.dot(x) + x.dot(&self.generator);
                f -= &anti;
            }
        }
        f
    }

    /// `sum_t coeff_t * exp(-tau_t (g_k + g_l)) * X_t`, elementwise.
    fn combine(&self, terms: &[(f64, f64, &Array2<C64>)]) -> Array2<C64> {
        let n = self.dim();
        let mut out = Array2::<C64>::zeros((n, n));
        match &self.decay {
            Some(g) => {
                for &(coeff, tau, x) in terms {
                    if coeff == 0.0 {
                        continue;
                    }
                    if tau == 0.0 {
                        out.scaled_add(C64::new(coeff, 0.0), x);
                        continue;
                    }
                    // exp(-tau (g_k + g_l)) factors into a rank-one product.
                    let e = g.mapv(|gk| (-tau * gk).exp());
                    Zip::indexed(&mut out)
                        .and(x)
                        .for_each(|(k, l), o, &xi| *o += xi * (coeff * e[k] * e[l]));
                }
            }
            None => {
                for &(coeff, _, x) in terms {
                    if coeff != 0.0 {
                        out.scaled_add(C64::new(coeff, 0.0), x);
                    }
                }
            }
        }
        out
    }
}

fn max_abs(x: &Array2<C64>) -> f64 {
    x.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Stateful stepper carrying the step size and first-same-as-last stage.
pub(crate) struct Stepper<'a> {
    prop: &'a Propagator,
    opts: SolverOptions,
    h: Option<f64>,
    first_stage: Option<Array2<C64>>,
    pub(crate) stats: SolverStats,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(prop: &'a Propagator, opts: SolverOptions) -> Result<Self> {
        opts.validate()?;
        Ok(Self {
            prop,
            opts,
            h: opts.initial_step,
            first_stage: None,
            stats: SolverStats::default(),
        })
    }

    fn initial_step(&mut self, y: &Array2<C64>, span: f64) -> f64 {
        let f = self.prop.full_rhs(y);
        self.stats.jump_evaluations += 1;
        let fy = max_abs(&f);
        let scale = self.opts.atol + self.opts.rtol * max_abs(y);
        let h = if fy > 0.0 {
            0.01 * (scale / self.opts.rtol) / fy
        } else {
            span
        };
        h.clamp(self.opts.min_step, span.max(self.opts.min_step))
    }

    /// Advances `y` (working basis, Hermitian) from `t0` to exactly `t1`.
    pub(crate) fn advance(&mut self, y: &mut Array2<C64>, t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        if t1 <= t0 {
            return Ok(());
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(y, t1 - t0),
        };
        let mut just_rejected = false;
        while t < t1 {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::StepBudget {
                    max_steps: self.opts.max_steps,
                    t,
                });
            }
            let remaining = t1 - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            if step < self.opts.min_step && !last {
                return Err(Error::StepUnderflow {
                    t,
                    h: step,
                    channel: self.prop.dominant.0.clone(),
                    norm: self.prop.dominant.1,
                });
            }
            let (y_new, k_last, err) = self.try_step(y, step);
            let scale = self.opts.atol + self.opts.rtol * max_abs(y).max(max_abs(&y_new));
            let ratio = err / scale;
            if ratio.is_finite() && ratio <= 1.0 {
                *y = y_new;
                self.first_stage = Some(k_last);
                t = if last { t1 } else { t + step };
                self.stats.accepted += 1;
                self.stats.last_step = step;
                let grow = if ratio == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                let grow = if just_rejected { grow.min(1.0) } else { grow };
                // A step clipped to hit t1 keeps the previous size proposal.
                h = if last && step < h { h } else { step * grow };
                just_rejected = false;
            } else {
                self.stats.rejected += 1;
                let shrink = if ratio.is_finite() {
                    (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = step * shrink;
                just_rejected = true;
                if h < self.opts.min_step {
                    return Err(Error::StepUnderflow {
                        t,
                        h,
                        channel: self.prop.dominant.0.clone(),
                        norm: self.prop.dominant.1,
                    });
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }

    /// One Dormand–Prince step; returns the new state, its stage value (for
    /// reuse as the next first stage) and the max-norm error estimate.
    fn try_step(&mut self, y: &Array2<C64>, h: f64) -> (Array2<C64>, Array2<C64>, f64) {
        let prop = self.prop;
        let k1 = match &self.first_stage {
            Some(k) => k.clone(),
            None => {
                self.stats.jump_evaluations += 1;
                prop.field(y)
            }
        };
        let mut ks: Vec<Array2<C64>> = Vec::with_capacity(7);
        ks.push(k1);
        let mut y_new = Array2::zeros(y.raw_dim());
        for i in 1..7 {
            let mut terms: Vec<(f64, f64, &Array2<C64>)> = Vec::with_capacity(i + 1);
            terms.push((1.0, C[i] * h, y));
            for (j, k) in ks.iter().enumerate().take(i) {
                terms.push((h * A[i][j], (C[i] - C[j]) * h, k));
            }
            let mut stage = prop.combine(&terms);
            if i == 6 {
                symmetrize_in_place(&mut stage);
            }
            let k = prop.field(&stage);
            self.stats.jump_evaluations += 1;
            if i == 6 {
                y_new = stage;
            }
            ks.push(k);
        }
        let err_terms: Vec<(f64, f64, &Array2<C64>)> = ks
            .iter()
            .enumerate()
            .map(|(j, k)| (h * E[j], (1.0 - C[j]) * h, k))
            .collect();
        let mut err = max_abs(&prop.combine(&err_terms));
        if prop.direction == Direction::Forward {
            // The exact flow conserves the trace; its change over the step is
            // a free a-posteriori error indicator that the embedded estimate
            // misses on the stiff modes.
            let rate = self.opts.trace_drift_rate;
            if rate > 0.0 {
                let drift = (y_new.diag().sum() - y.diag().sum()).norm();
                let scale = self.opts.atol + self.opts.rtol * max_abs(y).max(max_abs(&y_new));
                err = err.max(drift / (rate * h) * scale);
            }
        }
        let k_last = ks.pop().unwrap();
        (y_new, k_last, err)
    }
}
