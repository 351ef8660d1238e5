//! Finite-energy square-lattice GKP code: conjugated quadratures, the four
//! stabilizing dissipators, the Lyapunov operator, codewords and the
//! logical operator basis.
//!
//! With `E = exp(-(eps/2)(Q^2 + P^2))` the dissipators are
//! `V = E exp(+-i eta Q) E^{-1} - I` and `E exp(+-i eta P) E^{-1} - I`. The
//! similarity transform is evaluated in closed form through the non-Hermitian
//! quadratures `R = cosh(eps) Q + i sinh(eps) P` and
//! `S = -i sinh(eps) Q + cosh(eps) P`, and `exp(i eta R)` is exponentiated
//! directly: `E^{-1}` has entries growing like `e^{eps n}` and is never formed.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::matrix_exponential;
use crate::fock::{
    inner, make_number, make_quadratures, vector_norm, StateVector, TruncatedOperator,
};
use crate::hermite::hermite_functions;
use crate::spectral::HermitianEigen;

/// Square-lattice constant `2 sqrt(pi)`: two-dimensional code space.
pub const ETA_SQUARE: f64 = 3.544_907_701_811_032;
/// Sensor-state lattice constant `sqrt(2 pi)`: one-dimensional kernel.
pub const ETA_SENSOR: f64 = 2.506_628_274_631_000_2;

const LATTICE_TOL: f64 = 1e-12;

/// Fock levels per unit of `1/eps` kept by the default truncation.
pub const TRUNCATION_FACTOR: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GkpParameters {
    pub epsilon: f64,
    pub eta: f64,
    pub dim: usize,
}

impl GkpParameters {
    /// Parameters with the default truncation `dim = ceil(20 / eps)`.
    pub fn new(epsilon: f64, eta: f64) -> Result<Self> {
        validate_physical(epsilon, eta)?;
        let dim = default_dim(epsilon);
        Self::with_dim(epsilon, eta, dim)
    }

    /// Parameters with an explicit truncation; no lower bound beyond 2 is
    /// enforced so that convergence studies can undercut the default rule.
    pub fn with_dim(epsilon: f64, eta: f64, dim: usize) -> Result<Self> {
        validate_physical(epsilon, eta)?;
        crate::fock::check_dim(dim)?;
        Ok(Self { epsilon, eta, dim })
    }

    /// Like [`GkpParameters::with_dim`] but refuses truncations below the
    /// `20 / eps` rule.
    pub fn with_checked_dim(epsilon: f64, eta: f64, dim: usize) -> Result<Self> {
        let p = Self::with_dim(epsilon, eta, dim)?;
        if !p.truncation_adequate() {
            return Err(Error::InvalidInput(format!(
                "dim {dim} is below the truncation rule ceil(20/eps) = {}",
                default_dim(epsilon)
            )));
        }
        Ok(p)
    }

    pub fn square(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, ETA_SQUARE)
    }

    pub fn truncation_adequate(&self) -> bool {
        self.dim >= default_dim(self.epsilon)
    }

    pub fn lattice(&self) -> Option<Lattice> {
        Lattice::classify(self.eta)
    }

    /// Hypotheses of the convergence theorem, recorded but not enforced.
    pub fn certified_regime(&self) -> bool {
        self.lattice().is_some() && self.epsilon <= 1.0 / (2.0 * self.eta)
    }
}

fn validate_physical(epsilon: f64, eta: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidInput(format!("eta must be positive, got {eta}")));
    }
    Ok(())
}

pub fn default_dim(epsilon: f64) -> usize {
    (TRUNCATION_FACTOR / epsilon).ceil().max(2.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lattice {
    /// `eta = 2 sqrt(pi)`, one logical qubit.
    Square,
    /// `eta = sqrt(2 pi)`, single grid state.
    Sensor,
}

impl Lattice {
    pub fn classify(eta: f64) -> Option<Self> {
        if (eta - ETA_SQUARE).abs() <= LATTICE_TOL {
            Some(Lattice::Square)
        } else if (eta - ETA_SENSOR).abs() <= LATTICE_TOL {
            Some(Lattice::Sensor)
        } else {
            None
        }
    }

    pub fn eta(self) -> f64 {
        match self {
            Lattice::Square => ETA_SQUARE,
            Lattice::Sensor => ETA_SENSOR,
        }
    }

    /// Dimension of the kernel of W.
    pub fn code_dimension(self) -> usize {
        match self {
            Lattice::Square => 2,
            Lattice::Sensor => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    pub certified: bool,
}

/// Lower bound on the decay rate of `Tr(W rho)`:
/// `(sinh(h s) - sin(h c))(1 - e^{-3hs/2}) - (cosh(h s) - cos(h c))(1 + e^{-3hs/2})`
/// with `h = eta^2`, `s = sinh(2 eps)`, `c = cosh(2 eps)`.
pub fn kappa(epsilon: f64, eta: f64) -> Kappa {
    let h = eta * eta;
    let s = (2.0 * epsilon).sinh();
    let c = (2.0 * epsilon).cosh();
    let damp = (-1.5 * h * s).exp();
    let value = ((h * s).sinh() - (h * c).sin()) * (1.0 - damp)
        - ((h * s).cosh() - (h * c).cos()) * (1.0 + damp);
    let certified = Lattice::classify(eta).is_some()
        && epsilon > 0.0
        && epsilon <= 1.0 / (2.0 * eta)
        && value > 0.0;
    Kappa { value, certified }
}

/// Small-epsilon asymptote `2 eta^4 eps^2` of [`kappa`].
pub fn kappa_asymptote(epsilon: f64, eta: f64) -> f64 {
    2.0 * eta.powi(4) * epsilon * epsilon
}

/// `R = cosh(eps) Q + i sinh(eps) P`, `S = -i sinh(eps) Q + cosh(eps) P`.
pub fn build_conjugated_quadratures(
    params: &GkpParameters,
) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let (q, p) = make_quadratures(params.dim)?;
    let ch = params.epsilon.cosh();
    let sh = params.epsilon.sinh();
    let r = &q.scale_real(ch) + &p.scale(C64::new(0.0, sh));
    let s = &q.scale(C64::new(0.0, -sh)) + &p.scale_real(ch);
    Ok((r, s))
}

/// `[exp(i eta R) - I, exp(i eta S) - I, exp(-i eta R) - I, exp(-i eta S) - I]`.
pub fn build_dissipators(params: &GkpParameters) -> Result<[TruncatedOperator; 4]> {
    let (r, s) = build_conjugated_quadratures(params)?;
    dissipators_from(&r, &s, params.eta)
}

pub(crate) fn dissipators_from(
    r: &TruncatedOperator,
    s: &TruncatedOperator,
    eta: f64,
) -> Result<[TruncatedOperator; 4]> {
    let id = TruncatedOperator::identity(r.dim())?;
    let i_eta = C64::new(0.0, eta);
    let v = |gen: &TruncatedOperator, sign: f64| -> Result<TruncatedOperator> {
        Ok(&matrix_exponential(&gen.scale(i_eta * sign))? - &id)
    };
    Ok([v(r, 1.0)?, v(s, 1.0)?, v(r, -1.0)?, v(s, -1.0)?])
}

/// `W = sum_k V_k^dagger V_k`, symmetrized.
pub fn build_lyapunov(dissipators: &[TruncatedOperator]) -> Result<TruncatedOperator> {
    let first = dissipators
        .first()
        .ok_or_else(|| Error::InvalidInput("no dissipators given".into()))?;
    let mut w = TruncatedOperator::zeros(first.dim())?;
    for v in dissipators {
        first.ensure_same_dim(v)?;
        w = &w + &v.adjoint().matmul(v);
    }
    Ok(w.hermitian_part())
}

/// Position grid and comb truncation used to project codewords on Fock states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub half_width: f64,
    pub step: f64,
    /// Comb peaks `m` with `|m| <= comb_terms` are kept.
    pub comb_terms: usize,
}

const COMB_WEIGHT_CUTOFF: f64 = 1e-14;
const DROPPED_WEIGHT_LIMIT: f64 = 1e-12;

impl QuadratureGrid {
    /// `K` is the smallest comb index whose Mehler weight falls below 1e-14,
    /// `L = (K + 1) * spacing`, and the step resolves the squeezed peaks.
    pub fn for_parameters(params: &GkpParameters) -> Self {
        let t = params.epsilon.tanh();
        let spacing = 2.0 * PI / params.eta;
        let mut k = 0usize;
        while comb_weight(k as f64 * spacing, t) >= COMB_WEIGHT_CUTOFF {
            k += 1;
        }
        Self {
            half_width: (k as f64 + 1.0) * spacing,
            step: (t.sqrt() / 8.0).min(0.02),
            comb_terms: k,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (self.half_width / self.step).ceil() as i64;
        (-n..=n).map(|j| j as f64 * self.step).collect()
    }

    /// Upper bound on the relative comb weight lost to the truncated sum and
    /// to the finite grid extent.
    pub fn dropped_weight(&self, params: &GkpParameters) -> f64 {
        let t = params.epsilon.tanh();
        let spacing = 2.0 * PI / params.eta;
        let k = self.comb_terms as f64;
        // Geometric tail of the omitted peaks (ratio bounded by the first term).
        let first = comb_weight((k + 1.0) * spacing, t);
        let ratio = comb_weight((k + 2.0) * spacing, t) / first.max(f64::MIN_POSITIVE);
        let comb_tail = 2.0 * first / (1.0 - ratio.min(0.5));
        // Largest weighted Gaussian tail of a retained peak beyond the grid.
        let ch = params.epsilon.cosh();
        let grid_tail = (0..=self.comb_terms)
            .map(|m| {
                let x = m as f64 * spacing;
                let gap = (self.half_width - x / ch).max(0.0);
                comb_weight(x, t) * (-gap * gap / (2.0 * t)).exp()
            })
            .fold(0.0, f64::max);
        comb_tail.max(grid_tail)
    }
}

fn comb_weight(q: f64, tanh_eps: f64) -> f64 {
    (-0.5 * tanh_eps * q * q).exp()
}

/// Regularized comb `sum_m w_m exp(-(q - m d / cosh eps)^2 / (2 tanh eps))`
/// restricted to `m = offset (mod stride)`.
fn comb_wavefunction(
    params: &GkpParameters,
    grid: &QuadratureGrid,
    stride: i64,
    offset: i64,
    q: &[f64],
) -> Vec<f64> {
    let t = params.epsilon.tanh();
    let ch = params.epsilon.cosh();
    let norm = 1.0 / (2.0 * PI * params.epsilon.sinh()).sqrt();
    let spacing = 2.0 * PI / params.eta;
    let kmax = grid.comb_terms as i64;
    let peaks: Vec<(f64, f64)> = (-kmax..=kmax)
        .filter(|m| m.rem_euclid(stride) == offset)
        .map(|m| {
            let x = m as f64 * spacing;
            (norm * comb_weight(x, t), x / ch)
        })
        .collect();
    q.iter()
        .map(|&x| {
            peaks
                .iter()
                .map(|&(w, c)| w * (-(x - c) * (x - c) / (2.0 * t)).exp())
                .sum()
        })
        .collect()
}

fn project_on_fock(hermite: &ndarray::Array2<f64>, psi: &[f64], step: f64) -> Vec<f64> {
    // Trapezoid rule; the integrand is negligible at both grid ends.
    let last = psi.len() - 1;
    hermite
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(psi.iter())
                .enumerate()
                .map(|(j, (h, f))| {
                    let w = if j == 0 || j == last { 0.5 } else { 1.0 };
                    w * h * f
                })
                .sum::<f64>()
                * step
        })
        .collect()
}

/// Finite-energy codewords from the position-space comb wavefunctions.
pub fn build_codewords(params: &GkpParameters) -> Result<Vec<StateVector>> {
    build_codewords_on(params, &QuadratureGrid::for_parameters(params))
}

pub fn build_codewords_on(
    params: &GkpParameters,
    grid: &QuadratureGrid,
) -> Result<Vec<StateVector>> {
    let lattice = params.lattice().ok_or_else(|| {
        Error::InvalidInput(format!(
            "codewords are defined for eta = 2 sqrt(pi) or sqrt(2 pi), got {}",
            params.eta
        ))
    })?;
    if !(grid.step > 0.0 && grid.half_width > 0.0) {
        return Err(Error::InvalidInput("quadrature grid must have positive extent".into()));
    }
    let dropped = grid.dropped_weight(params);
    if dropped > DROPPED_WEIGHT_LIMIT {
        return Err(Error::QuadratureGrid {
            dropped,
            limit: DROPPED_WEIGHT_LIMIT,
        });
    }
    let q = grid.points();
    let h = hermite_functions(params.dim, &q);
    let to_state = |c: Vec<f64>| -> StateVector {
        Array1::from_iter(c.into_iter().map(|x| C64::new(x, 0.0)))
    };
    match lattice {
        Lattice::Square => {
            let even = to_state(project_on_fock(&h, &comb_wavefunction(params, grid, 2, 0, &q), grid.step));
            let odd = to_state(project_on_fock(&h, &comb_wavefunction(params, grid, 2, 1, &q), grid.step));
            let zero = normalized(&even)?;
            let overlap = inner(&even, &odd) / inner(&even, &even);
            let one = normalized(&(&odd - &even.mapv(|z| z * overlap)))?;
            Ok(vec![zero, one])
        }
        Lattice::Sensor => {
            let comb = to_state(project_on_fock(&h, &comb_wavefunction(params, grid, 1, 0, &q), grid.step));
            Ok(vec![normalized(&comb)?])
        }
    }
}

fn normalized(v: &StateVector) -> Result<StateVector> {
    let n = vector_norm(v);
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Verification("codeword projection vanished".into()));
    }
    Ok(v.mapv(|z| z / n))
}

/// Required ratio between the first excited and the largest kernel eigenvalue.
pub const KERNEL_GAP_RATIO: f64 = 1e3;

/// Eigenvectors of the `kernel_dim` smallest eigenvalues of `W`.
pub fn kernel_codewords_via_eigen(
    lyapunov: &TruncatedOperator,
    kernel_dim: usize,
) -> Result<Vec<StateVector>> {
    if kernel_dim == 0 || kernel_dim >= lyapunov.dim() {
        return Err(Error::InvalidInput(format!("invalid kernel dimension {kernel_dim}")));
    }
    let eig = HermitianEigen::new(lyapunov)?;
    let kernel = eig.values[kernel_dim - 1].abs();
    let next = eig.values[kernel_dim];
    if next < KERNEL_GAP_RATIO * kernel {
        return Err(Error::DegenerateGap {
            kernel,
            next,
            required: KERNEL_GAP_RATIO,
        });
    }
    Ok((0..kernel_dim).map(|k| eig.vector(k)).collect())
}

/// Orthogonal projector onto the span of orthonormal vectors.
pub fn span_projector(vectors: &[StateVector]) -> Result<TruncatedOperator> {
    let dim = vectors
        .first()
        .ok_or_else(|| Error::InvalidInput("empty span".into()))?
        .len();
    let mut p = TruncatedOperator::zeros(dim)?;
    for v in vectors {
        p = &p + &TruncatedOperator::outer(v, v)?;
    }
    Ok(p)
}

/// Spectral-norm distance between the orthogonal projectors onto two spans,
/// i.e. the sine of the largest principal angle.
pub fn projector_distance(a: &[StateVector], b: &[StateVector]) -> Result<f64> {
    let pa = span_projector(a)?;
    let pb = span_projector(b)?;
    pa.ensure_same_dim(&pb)?;
    let eig = HermitianEigen::new(&(&pa - &pb))?;
    Ok(eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// `S_0, S_x, S_y, S_z` built from `|0>` and `|1>`.
#[derive(Clone, Debug)]
pub struct LogicalBasis {
    pub s0: TruncatedOperator,
    pub sx: TruncatedOperator,
    pub sy: TruncatedOperator,
    pub sz: TruncatedOperator,
}

impl LogicalBasis {
    pub fn from_codewords(zero: &StateVector, one: &StateVector) -> Result<Self> {
        let p00 = TruncatedOperator::outer(zero, zero)?;
        let p11 = TruncatedOperator::outer(one, one)?;
        let p10 = TruncatedOperator::outer(one, zero)?;
        let p01 = TruncatedOperator::outer(zero, one)?;
        let i = C64::new(0.0, 1.0);
        Ok(Self {
            s0: &p00 + &p11,
            sx: &p10 + &p01,
            sy: &p10.scale(i) - &p01.scale(i),
            sz: &p00 - &p11,
        })
    }

    pub fn paulis(&self) -> [&TruncatedOperator; 3] {
        [&self.sx, &self.sy, &self.sz]
    }
}

#[derive(Clone, Debug)]
pub struct GkpCode {
    pub params: GkpParameters,
    pub r: TruncatedOperator,
    pub s: TruncatedOperator,
    pub dissipators: [TruncatedOperator; 4],
    pub lyapunov: TruncatedOperator,
    pub codewords: Vec<StateVector>,
    /// Present for the square lattice only.
    pub logical: Option<LogicalBasis>,
}

impl GkpCode {
    pub fn build(params: GkpParameters) -> Result<Self> {
        let (r, s) = build_conjugated_quadratures(&params)?;
        let dissipators = dissipators_from(&r, &s, params.eta)?;
        let lyapunov = build_lyapunov(&dissipators)?;
        let codewords = build_codewords(&params)?;
        let logical = match codewords.as_slice() {
            [zero, one] => Some(LogicalBasis::from_codewords(zero, one)?),
            _ => None,
        };
        Ok(Self {
            params,
            r,
            s,
            dissipators,
            lyapunov,
            codewords,
            logical,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn kappa(&self) -> Kappa {
        kappa(self.params.epsilon, self.params.eta)
    }

    pub fn logical_basis(&self) -> Result<&LogicalBasis> {
        self.logical
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("logical basis requires the square lattice".into()))
    }

    pub fn diagnostics(&self) -> Result<CodewordDiagnostics> {
        CodewordDiagnostics::compute(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordDiagnostics {
    pub norms: Vec<f64>,
    /// `|<0|1>|`, zero for the sensor state.
    pub overlap: f64,
    pub mean_photon_number: Vec<f64>,
    pub odd_fock_weight: Vec<f64>,
    /// `dissipator_residuals[c][k] = ||V_k |codeword c>||`.
    pub dissipator_residuals: Vec<[f64; 4]>,
    pub lyapunov_expectation: Vec<f64>,
    /// Spectral distance to the span of the smallest eigenvectors of W.
    pub eigen_kernel_distance: f64,
}

impl CodewordDiagnostics {
    pub fn compute(code: &GkpCode) -> Result<Self> {
        let number = make_number(code.dim())?;
        let mut out = CodewordDiagnostics {
            norms: Vec::new(),
            overlap: 0.0,
            mean_photon_number: Vec::new(),
            odd_fock_weight: Vec::new(),
            dissipator_residuals: Vec::new(),
            lyapunov_expectation: Vec::new(),
            eigen_kernel_distance: f64::NAN,
        };
        for c in &code.codewords {
            out.norms.push(vector_norm(c));
            out.mean_photon_number.push(number.expectation(c)?.re);
            out.odd_fock_weight.push(c.iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum());
            let mut res = [0.0; 4];
            for (k, v) in code.dissipators.iter().enumerate() {
                res[k] = vector_norm(&v.apply(c)?);
            }
            out.dissipator_residuals.push(res);
            out.lyapunov_expectation.push(code.lyapunov.expectation(c)?.re);
        }
        if let [a, b] = code.codewords.as_slice() {
            out.overlap = inner(a, b).norm();
        }
        let kernel = kernel_codewords_via_eigen(&code.lyapunov, code.codewords.len())?;
        out.eigen_kernel_distance = projector_distance(&code.codewords, &kernel)?;
        Ok(out)
    }

    pub fn max_dissipator_residual(&self) -> f64 {
        self.dissipator_residuals
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::InteriorBlock;

    #[test]
    fn lattice_constants() {
        assert!((ETA_SQUARE - 2.0 * PI.sqrt()).abs() < 1e-15);
        assert!((ETA_SENSOR - (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn default_truncation_rule() {
        let p = GkpParameters::square(0.1).unwrap();
        assert_eq!(p.dim, 200);
        assert!(p.certified_regime());
        assert_eq!(GkpParameters::square(0.05).unwrap().dim, 400);
        assert!(GkpParameters::with_checked_dim(0.1, ETA_SQUARE, 150).is_err());
        assert!(GkpParameters::with_dim(0.1, ETA_SQUARE, 150).is_ok());
        assert!(GkpParameters::new(-0.1, ETA_SQUARE).is_err());
        assert!(GkpParameters::new(0.1, 0.0).is_err());
    }

    #[test]
    fn certified_regime_boundary() {
        let edge = 1.0 / (2.0 * ETA_SQUARE);
        assert!(GkpParameters::with_dim(edge, ETA_SQUARE, 10).unwrap().certified_regime());
        assert!(!GkpParameters::with_dim(edge * 1.01, ETA_SQUARE, 10).unwrap().certified_regime());
        assert!(!GkpParameters::with_dim(0.05, 3.0, 10).unwrap().certified_regime());
    }

    #[test]
    fn kappa_vanishes_at_zero() {
        let k = kappa(0.0, ETA_SQUARE);
        assert!(k.value.abs() < 1e-12);
        assert!(!k.certified);
    }

    #[test]
    fn kappa_asymptotics() {
        let eps = 1e-3;
        let ratio = kappa(eps, ETA_SQUARE).value / kappa_asymptote(eps, ETA_SQUARE);
        assert!((0.95..=1.05).contains(&ratio), "{ratio}");
    }

    #[test]
    fn kappa_positive_on_certified_interval() {
        let edge = 1.0 / (2.0 * ETA_SQUARE);
        for k in 1..=400 {
            let eps = edge * k as f64 / 400.0;
            let kap = kappa(eps, ETA_SQUARE);
            assert!(kap.value > 0.0 && kap.certified, "eps={eps}: {kap:?}");
        }
    }

    #[test]
    fn kappa_monotone_near_zero() {
        let mut prev = 0.0;
        for k in 1..=200 {
            let v = kappa(0.02 * k as f64 / 200.0, ETA_SQUARE).value;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn kappa_negative_values_are_uncertified() {
        let mut negatives = 0;
        for k in 1..=1000 {
            let v = kappa(k as f64 / 1000.0, ETA_SQUARE);
            if v.value < 0.0 {
                negatives += 1;
                assert!(!v.certified);
            }
        }
        assert!(negatives > 0);
    }

    #[test]
    fn zero_epsilon_quadratures_reduce() {
        // eps = 0 bypasses parameter validation; build directly.
        let p = GkpParameters { epsilon: 0.0, eta: ETA_SQUARE, dim: 12 };
        let (r, s) = build_conjugated_quadratures(&p).unwrap();
        let (q, pm) = make_quadratures(12).unwrap();
        assert_eq!(r, q);
        assert_eq!(s, pm);
    }

    #[test]
    fn conjugated_commutators() {
        let p = GkpParameters::with_dim(0.1, ETA_SQUARE, 60).unwrap();
        let (r, s) = build_conjugated_quadratures(&p).unwrap();
        let block = InteriorBlock::default_for(60);
        let id = TruncatedOperator::identity(60).unwrap();
        let rs = r.commutator(&s);
        assert!(rs.interior_max_diff(&id.scale(C64::new(0.0, 1.0)), block).unwrap() <= 1e-10);
        let rr = r.commutator(&r.adjoint());
        let target = id.scale_real((0.2f64).sinh());
        assert!(rr.interior_max_diff(&target, block).unwrap() <= 1e-10);
        let rsd = r.commutator(&s.adjoint());
        let target = id.scale(C64::new(0.0, (0.2f64).cosh()));
        assert!(rsd.interior_max_diff(&target, block).unwrap() <= 1e-10);
    }

    #[test]
    fn zero_epsilon_dissipators_are_shifted_unitaries() {
        let p = GkpParameters { epsilon: 0.0, eta: ETA_SQUARE, dim: 80 };
        let vs = build_dissipators(&p).unwrap();
        let id = TruncatedOperator::identity(80).unwrap();
        for v in &vs {
            let u = v + &id;
            assert!(u.unitarity_defect() <= 1e-8);
        }
    }

    #[test]
    fn lyapunov_is_exactly_hermitian() {
        let p = GkpParameters::with_dim(0.2, ETA_SQUARE, 40).unwrap();
        let w = build_lyapunov(&build_dissipators(&p).unwrap()).unwrap();
        assert_eq!(w.hermiticity_defect(), 0.0);
        assert!(build_lyapunov(&[]).is_err());
    }

    #[test]
    fn quadrature_grid_rule() {
        let p = GkpParameters::square(0.1).unwrap();
        let g = QuadratureGrid::for_parameters(&p);
        let t = 0.1f64.tanh();
        let k = g.comb_terms as f64;
        assert!((-PI * k * k * t / 2.0).exp() < 1e-14);
        assert!((-PI * (k - 1.0) * (k - 1.0) * t / 2.0).exp() >= 1e-14);
        assert!((g.half_width - (k + 1.0) * PI.sqrt()).abs() < 1e-12);
        assert_eq!(g.step, 0.02);
        assert!(g.dropped_weight(&p) <= 1e-12);
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let p = GkpParameters::square(0.1).unwrap();
        let g = QuadratureGrid { half_width: 6.0, step: 0.02, comb_terms: 3 };
        assert!(matches!(build_codewords_on(&p, &g), Err(Error::QuadratureGrid { .. })));
    }

    #[test]
    fn unknown_lattice_has_no_codewords() {
        let p = GkpParameters::with_dim(0.1, 3.0, 200).unwrap();
        assert!(matches!(build_codewords(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn codewords_orthonormal_and_even() {
        let p = GkpParameters::with_dim(0.25, ETA_SQUARE, 80).unwrap();
        let cw = build_codewords(&p).unwrap();
        assert_eq!(cw.len(), 2);
        assert!((vector_norm(&cw[0]) - 1.0).abs() < 1e-10);
        assert!((vector_norm(&cw[1]) - 1.0).abs() < 1e-10);
        assert!(inner(&cw[0], &cw[1]).norm() < 1e-10);
        for c in &cw {
            let odd: f64 = c.iter().skip(1).step_by(2).map(|z| z.norm_sqr()).sum();
            assert!(odd <= 1e-10);
        }
    }

    #[test]
    fn logical_basis_algebra() {
        let p = GkpParameters::with_dim(0.25, ETA_SQUARE, 80).unwrap();
        let cw = build_codewords(&p).unwrap();
        let b = LogicalBasis::from_codewords(&cw[0], &cw[1]).unwrap();
        // S_x S_y = i S_z on the code space.
        let lhs = b.sx.matmul(&b.sy);
        let rhs = b.sz.scale(C64::new(0.0, 1.0));
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
        for s in b.paulis() {
            assert!(s.is_hermitian(1e-14));
            assert!(s.matmul(s).max_abs_diff(&b.s0).unwrap() < 1e-10);
        }
    }

    #[test]
    fn degenerate_gap_detected() {
        let id = TruncatedOperator::identity(5).unwrap();
        assert!(matches!(
            kernel_codewords_via_eigen(&id, 2),
            Err(Error::DegenerateGap { .. })
        ));
    }
}
