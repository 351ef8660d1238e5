//! The 4x4 Hermitian circulant matrix `T_kl = exp(eta^2 [R_l^dagger, R_k]) - 1`
//! and its closed-form spectral decomposition.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CirculantTMatrix {
    pub epsilon: f64,
    pub eta: f64,
    pub entries: Array2<C64>,
}

/// Closed-form eigenpair `(lambda_k, w_k)` of `T = sum_k lambda_k w_k^dagger w_k`,
/// where `w_k` is a row vector; the eigenvector of `T` is the column `w_k^dagger`.
#[derive(Clone, Debug, PartialEq)]
pub struct TEigenpair {
    pub value: f64,
    pub row: Array1<C64>,
}

impl TEigenpair {
    /// `w_k^dagger` as a column vector.
    pub fn eigenvector(&self) -> Array1<C64> {
        self.row.mapv(|z| z.conj())
    }
}

fn s_c(epsilon: f64) -> (f64, f64) {
    ((2.0 * epsilon).sinh(), (2.0 * epsilon).cosh())
}

/// First row `[-1 + e^{-h s}, -1 + e^{-i h c}, -1 + e^{h s}, -1 + e^{i h c}]`
/// with `h = eta^2`; row `k` is the first row shifted right by `k`.
pub fn build_t_matrix(epsilon: f64, eta: f64) -> CirculantTMatrix {
    let (s, c) = s_c(epsilon);
    let h = eta * eta;
    let one = C64::new(1.0, 0.0);
    let row = [
        C64::new((-h * s).exp(), 0.0) - one,
        C64::from_polar(1.0, -h * c) - one,
        C64::new((h * s).exp(), 0.0) - one,
        C64::from_polar(1.0, h * c) - one,
    ];
    let entries = Array2::from_shape_fn((4, 4), |(k, l)| row[(l + 4 - k) % 4]);
    CirculantTMatrix {
        epsilon,
        eta,
        entries,
    }
}

impl CirculantTMatrix {
    /// `(lambda_1..lambda_4)` paired with `w_1..w_4`.
    pub fn closed_form_eigenpairs(&self) -> [TEigenpair; 4] {
        let (s, c) = s_c(self.epsilon);
        let h = self.eta * self.eta;
        let (hs, hc) = (h * s, h * c);
        let i = C64::new(0.0, 1.0);
        let r = |x: f64| C64::new(x, 0.0);
        let vec = |v: [C64; 4]| Array1::from(v.to_vec()).mapv(|z| z * 0.5);
        [
            TEigenpair {
                value: 2.0 * (hs.cosh() - hc.cos()),
                row: vec([r(1.0), r(-1.0), r(1.0), r(-1.0)]),
            },
            TEigenpair {
                value: 2.0 * (hs.cosh() + hc.cos() - 2.0),
                row: vec([r(1.0), r(1.0), r(1.0), r(1.0)]),
            },
            TEigenpair {
                value: -2.0 * (hs.sinh() - hc.sin()),
                row: vec([r(1.0), -i, r(-1.0), i]),
            },
            TEigenpair {
                value: -2.0 * (hs.sinh() + hc.sin()),
                row: vec([r(1.0), i, r(-1.0), -i]),
            },
        ]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let t = &self.entries;
        let mut worst = 0.0f64;
        for k in 0..4 {
            for l in 0..4 {
                worst = worst.max((t[(k, l)] - t[(l, k)].conj()).norm());
            }
        }
        worst
    }

    /// `lambda_4 <= lambda_3 <= 0 <= lambda_2 <= lambda_1`.
    pub fn eigenvalues_ordered(&self) -> bool {
        let p = self.closed_form_eigenpairs();
        let (l1, l2, l3, l4) = (p[0].value, p[1].value, p[2].value, p[3].value);
        l4 <= l3 && l3 <= 0.0 && 0.0 <= l2 && l2 <= l1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TSpectrumReport {
    pub epsilon: f64,
    pub eta: f64,
    pub numeric_eigenvalues: Vec<f64>,
    pub closed_form_eigenvalues: [f64; 4],
    /// `max_k |lambda_k - sorted numeric eigenvalue|`.
    pub eigenvalue_error: f64,
    /// `max_k ||T w_k - lambda_k w_k||`.
    pub residual: f64,
    /// `max |T - sum_k lambda_k w_k^dagger w_k|`.
    pub reconstruction_error: f64,
    /// Largest spectral-norm distance between numeric and closed-form
    /// eigenprojectors, grouped by degenerate clusters.
    pub projector_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Eigenvalues closer than this are treated as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-8;

fn projector(cols: &[Array1<C64>]) -> Array2<C64> {
    let mut p = Array2::<C64>::zeros((4, 4));
    for v in cols {
        for a in 0..4 {
            for b in 0..4 {
                p[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    p
}

fn spectral_norm_hermitian(m: &Array2<C64>) -> Result<f64> {
    use ndarray::ShapeBuilder;
    let mut f = Array2::<C64>::zeros((4, 4).f());
    f.assign(m);
    let (vals, _) = f.eigh(UPLO::Upper)?;
    Ok(vals.iter().fold(0.0f64, |a, x| a.max(x.abs())))
}

/// Matches the numerical eigendecomposition of `T` against the closed forms
/// up to eigenvector phases and rotations inside degenerate subspaces.
pub fn verify_t_spectrum(t: &CirculantTMatrix, tolerance: f64) -> Result<TSpectrumReport> {
    use ndarray::ShapeBuilder;
    let mut f = Array2::<C64>::zeros((4, 4).f());
    f.assign(&t.entries);
    let (vals, vecs) = f.eigh(UPLO::Upper)?;
    let pairs = t.closed_form_eigenpairs();

    let mut closed: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    closed.sort_by(f64::total_cmp);
    let eigenvalue_error = closed
        .iter()
        .zip(vals.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut residual = 0.0f64;
    for p in &pairs {
        let v = p.eigenvector();
        let tw = t.entries.dot(&v);
        let r = (&tw - &v.mapv(|z| z * p.value))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }

    // Cluster numeric eigenvalues and compare eigenprojectors cluster-wise.
    let mut projector_error = 0.0f64;
    let mut start = 0;
    while start < 4 {
        let mut end = start + 1;
        while end < 4 && vals[end] - vals[end - 1] <= CLUSTER_TOL * (1.0 + vals[end].abs()) {
            end += 1;
        }
        let lo = vals[start];
        let hi = vals[end - 1];
        let numeric: Vec<Array1<C64>> = (start..end).map(|k| vecs.column(k).to_owned()).collect();
        let analytic: Vec<Array1<C64>> = pairs
            .iter()
            .filter(|p| {
                let pad = CLUSTER_TOL * (1.0 + p.value.abs()) + tolerance;
                p.value >= lo - pad && p.value <= hi + pad
            })
            .map(|p| p.eigenvector())
            .collect();
        if analytic.len() != numeric.len() {
            return Err(Error::Verification(format!(
                "T eigenvalue cluster [{lo:.6e}, {hi:.6e}] has {} numeric but {} closed-form eigenvectors",
                numeric.len(),
                analytic.len()
            )));
        }
        let d = spectral_norm_hermitian(&(projector(&numeric) - projector(&analytic)))?;
        projector_error = projector_error.max(d);
        start = end;
    }

    let mut rebuilt = Array2::<C64>::zeros((4, 4));
    for p in &pairs {
        let v = p.eigenvector();
        for a in 0..4 {
            for b in 0..4 {
                rebuilt[(a, b)] += v[a] * v[b].conj() * p.value;
            }
        }
    }
    let reconstruction_error = (&rebuilt - &t.entries).iter().fold(0.0f64, |m, z| m.max(z.norm()));

    let passed = eigenvalue_error <= tolerance
        && residual <= tolerance
        && reconstruction_error <= tolerance
        && projector_error <= tolerance;
    let report = TSpectrumReport {
        epsilon: t.epsilon,
        eta: t.eta,
        numeric_eigenvalues: vals.to_vec(),
        closed_form_eigenvalues: [pairs[0].value, pairs[1].value, pairs[2].value, pairs[3].value],
        eigenvalue_error,
        residual,
        reconstruction_error,
        projector_error,
        tolerance,
        passed,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::ETA_SQUARE;

    /// `[R_l^dagger, R_k] = i (conj(a_l) b_k - conj(b_l) a_k)` for
    /// `R_k = a_k Q + b_k P`.
    fn t_from_commutators(eps: f64, eta: f64) -> Array2<C64> {
        let i = C64::new(0.0, 1.0);
        let ch = C64::new(eps.cosh(), 0.0);
        let sh = C64::new(eps.sinh(), 0.0);
        let coeffs = [(ch, i * sh), (-i * sh, ch), (-ch, -i * sh), (i * sh, -ch)];
        Array2::from_shape_fn((4, 4), |(k, l)| {
            let (ak, bk) = coeffs[k];
            let (al, bl) = coeffs[l];
            let comm = i * (al.conj() * bk - bl.conj() * ak);
            (comm * eta * eta).exp() - 1.0
        })
    }

    #[test]
    fn entries_match_commutator_definition() {
        for eps in [0.0, 0.025, 0.05, 0.1, 0.14] {
            let t = build_t_matrix(eps, ETA_SQUARE);
            let oracle = t_from_commutators(eps, ETA_SQUARE);
            for (a, b) in t.entries.iter().zip(oracle.iter()) {
                assert!((a - b).norm() < 1e-12, "eps={eps}");
            }
            assert!(t.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn vanishes_at_zero_epsilon() {
        let t = build_t_matrix(0.0, ETA_SQUARE);
        assert!(t.entries.iter().all(|z| z.norm() < 1e-12));
        let report = verify_t_spectrum(&t, 1e-10).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn eigenpairs_match() {
        for eps in [0.025, 0.05, 0.1] {
            let report = verify_t_spectrum(&build_t_matrix(eps, ETA_SQUARE), 1e-10).unwrap();
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn second_eigenpair_at_005() {
        let t = build_t_matrix(0.05, ETA_SQUARE);
        let w = Array1::from(vec![C64::new(0.5, 0.0); 4]);
        let (s, c) = s_c(0.05);
        let h = ETA_SQUARE * ETA_SQUARE;
        let lambda = 2.0 * ((h * s).cosh() + (h * c).cos() - 2.0);
        let tw = t.entries.dot(&w);
        for k in 0..4 {
            assert!((tw[k] - w[k] * lambda).norm() < 1e-12);
        }
    }

    #[test]
    fn ordering_on_certified_interval() {
        for k in 1..=200 {
            let eps = 0.5 / ETA_SQUARE * k as f64 / 200.0;
            assert!(build_t_matrix(eps, ETA_SQUARE).eigenvalues_ordered(), "eps={eps}");
        }
    }

    #[test]
    fn detects_wrong_closed_form() {
        let mut t = build_t_matrix(0.05, ETA_SQUARE);
        t.entries[(0, 0)] += C64::new(1e-3, 0.0);
        t.entries[(1, 1)] += C64::new(1e-3, 0.0);
        let ok = verify_t_spectrum(&t, 1e-10).map(|r| r.passed).unwrap_or(false);
        assert!(!ok);
    }
}
