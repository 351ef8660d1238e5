//! Operator identities and inequalities behind the convergence bound,
//! checked on interior blocks of the truncated space.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analysis::check::Check;
use crate::analysis::tmatrix::build_t_matrix;
use crate::code::{build_conjugated_quadratures, GkpCode, GkpParameters};
use crate::error::Result;
use crate::expm::matrix_exponential;
use crate::fock::{make_number, make_quadratures, InteriorBlock, TruncatedOperator};
use crate::lindblad::{adjoint_rhs, LindbladModel};
use crate::spectral::{hermitian_eigenvalues, HermitianEigen};

fn i_times(x: f64) -> C64 {
    C64::new(0.0, x)
}

/// `R_1 = R, R_2 = S, R_3 = -R, R_4 = -S`.
fn generators(r: &TruncatedOperator, s: &TruncatedOperator) -> [TruncatedOperator; 4] {
    [r.clone(), s.clone(), r.scale_real(-1.0), s.scale_real(-1.0)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovIdentityReport {
    pub margin: usize,
    /// Interior deviation of `sum_k D*_{V_k}(W)` from `sum_kl V_k^dagger [V_l^dagger, V_k] V_l`.
    pub commutator_form: f64,
    /// Interior deviation of `sum_k D*_{V_k}(W)` from `sum_kl W_k^dagger T_kl W_l`.
    pub circulant_form: f64,
    /// Largest interior entry of `sum_k D*_{V_k}(W)`.
    pub scale: f64,
}

/// Evaluates both closed forms of the Heisenberg derivative of `W`, with
/// `W_k = exp(-i eta R_k^dagger) V_k`.
pub fn lyapunov_derivative_identity(code: &GkpCode, block: InteriorBlock) -> Result<LyapunovIdentityReport> {
    let model = LindbladModel::gkp(code)?;
    let lhs = adjoint_rhs(&model, &code.lyapunov)?;
    let v = &code.dissipators;
    let vd: Vec<TruncatedOperator> = v.iter().map(|x| x.adjoint()).collect();

    let dim = code.dim();
    let mut comm = TruncatedOperator::zeros(dim)?;
    for k in 0..4 {
        for l in 0..4 {
            let c = vd[l].commutator(&v[k]);
            comm = &comm + &vd[k].matmul(&c).matmul(&v[l]);
        }
    }

    let eta = code.params.eta;
    let gens = generators(&code.r, &code.s);
    let mut wk = Vec::with_capacity(4);
    for (g, vk) in gens.iter().zip(v.iter()) {
        let e = matrix_exponential(&g.adjoint().scale(i_times(-eta)))?;
        wk.push(e.matmul(vk));
    }
    let wkd: Vec<TruncatedOperator> = wk.iter().map(|x| x.adjoint()).collect();
    let t = build_t_matrix(code.params.epsilon, eta);
    let mut circ = TruncatedOperator::zeros(dim)?;
    for k in 0..4 {
        for l in 0..4 {
            let term = wkd[k].matmul(&wk[l]).scale(t.entries[(k, l)]);
            circ = &circ + &term;
        }
    }
    Ok(LyapunovIdentityReport {
        margin: block.margin(),
        commutator_form: lhs.interior_max_diff(&comm, block)?,
        circulant_form: lhs.interior_max_diff(&circ, block)?,
        scale: lhs.interior_max_abs(block),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub epsilon: f64,
    pub eta: f64,
    pub dim: usize,
    pub margin: usize,
    /// Interior max deviation for `Lambda_+` and `Lambda_-`.
    pub deviation: [f64; 2],
    /// Row and column of the largest deviation.
    pub location: [(usize, usize); 2],
}

impl LambdaReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviation[0].max(self.deviation[1])
    }
}

fn argmax_interior(a: &TruncatedOperator, b: &TruncatedOperator, block: InteriorBlock) -> (f64, (usize, usize)) {
    let n = block.size(a.dim());
    let mut best = (0.0, (0, 0));
    for i in 0..n {
        for j in 0..n {
            let d = (a.get(i, j) - b.get(i, j)).norm();
            if d > best.0 {
                best = (d, (i, j));
            }
        }
    }
    best
}

/// `cosh(b P)` and `cos(c Q)` through the spectral decompositions of the
/// truncated quadratures.
fn quadrature_functions(dim: usize, b: f64, c: f64) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let (q, p) = make_quadratures(dim)?;
    let cosh_p = HermitianEigen::new(&p)?.map(|x| (b * x).cosh());
    let cos_q = HermitianEigen::new(&q)?.map(|x| (c * x).cos());
    Ok((cosh_p, cos_q))
}

/// Builds `Lambda_pm = exp(-i eta R^dagger) exp(i eta R / 2) pm exp(i eta R^dagger) exp(-i eta R / 2)`
/// by matrix exponentials and compares `Lambda_pm^dagger Lambda_pm` with
/// `2 e^{-eta^2 s / 8} (cosh(3 eta sinh(eps) P) pm e^{-3 eta^2 s / 4} cos(eta cosh(eps) Q))`.
pub fn verify_lambda_closed_form(epsilon: f64, eta: f64, dim: usize, block: InteriorBlock) -> Result<LambdaReport> {
    let params = GkpParameters::with_dim(epsilon, eta, dim)?;
    let (r, _) = build_conjugated_quadratures(&params)?;
    let rd = r.adjoint();
    let a = matrix_exponential(&rd.scale(i_times(-eta)))?.matmul(&matrix_exponential(&r.scale(i_times(eta / 2.0)))?);
    let b = matrix_exponential(&rd.scale(i_times(eta)))?.matmul(&matrix_exponential(&r.scale(i_times(-eta / 2.0)))?);
    let s = (2.0 * epsilon).sinh();
    let (cosh_p, cos_q) = quadrature_functions(dim, 3.0 * eta * epsilon.sinh(), eta * epsilon.cosh())?;
    let pref = 2.0 * (-eta * eta * s / 8.0).exp();
    let damp = (-0.75 * eta * eta * s).exp();

    let mut deviation = [0.0; 2];
    let mut location = [(0, 0); 2];
    for (idx, sign) in [1.0, -1.0].into_iter().enumerate() {
        let lam = &a + &b.scale_real(sign);
        let lhs = lam.adjoint().matmul(&lam);
        let rhs = (&cosh_p + &cos_q.scale_real(sign * damp)).scale_real(pref);
        let (d, loc) = argmax_interior(&lhs, &rhs, block);
        deviation[idx] = d;
        location[idx] = loc;
    }
    Ok(LambdaReport {
        epsilon,
        eta,
        dim,
        margin: block.margin(),
        deviation,
        location,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorInequalityReport {
    pub epsilon: f64,
    pub eta: f64,
    pub dim: usize,
    pub margin: usize,
    /// Smallest interior eigenvalue of
    /// `e^{-3 eta^2 |s| / 4} cosh(3 eta sinh(eps) P) -+ cos(eta cosh(eps) Q)`,
    /// for the upper and lower sign respectively.
    pub min_eigenvalue: [f64; 2],
}

pub fn operator_inequality(epsilon: f64, eta: f64, dim: usize, block: InteriorBlock) -> Result<OperatorInequalityReport> {
    let s = (2.0 * epsilon).sinh();
    let (cosh_p, cos_q) = quadrature_functions(dim, 3.0 * eta * epsilon.sinh(), eta * epsilon.cosh())?;
    let lhs = cosh_p.scale_real((-0.75 * eta * eta * s.abs()).exp());
    let mut min_eigenvalue = [0.0; 2];
    for (idx, sign) in [1.0, -1.0].into_iter().enumerate() {
        let op = &lhs - &cos_q.scale_real(sign);
        let vals = hermitian_eigenvalues(&op.interior(block).to_owned())?;
        min_eigenvalue[idx] = vals[0];
    }
    Ok(OperatorInequalityReport {
        epsilon,
        eta,
        dim,
        margin: block.margin(),
        min_eigenvalue,
    })
}

/// Interior-block checks of the commutation structure of a code.
pub fn commutation_suite(code: &GkpCode, tolerance: f64) -> Result<Vec<Check>> {
    let dim = code.dim();
    let eps = code.params.epsilon;
    let eta = code.params.eta;
    let poly = InteriorBlock::default_for(dim);
    let wide = InteriorBlock::wide_for(dim);
    let id = TruncatedOperator::identity(dim)?;
    let (r, s) = (&code.r, &code.s);
    let mut out = Vec::new();

    let d = r.commutator(s).interior_max_diff(&id.scale(i_times(1.0)), poly)?;
    out.push(Check::at_most("[R,S] = i", d, tolerance));
    let d = r.commutator(&r.adjoint()).interior_max_diff(&id.scale_real((2.0 * eps).sinh()), poly)?;
    out.push(Check::at_most("[R,R^dag] = sinh(2 eps)", d, tolerance));
    let d = r.commutator(&s.adjoint()).interior_max_diff(&id.scale(i_times((2.0 * eps).cosh())), poly)?;
    out.push(Check::at_most("[R,S^dag] = i cosh(2 eps)", d, tolerance));

    // E Q E^{-1} with E = exp(-(eps/2)(Q^2 + P^2)).
    let (q, p) = make_quadratures(dim)?;
    let energy = (&q.matmul(&q) + &p.matmul(&p)).scale_real(eps / 2.0);
    let e = matrix_exponential(&energy.scale_real(-1.0))?;
    let e_inv = matrix_exponential(&energy)?;
    let conj = e.matmul(&q).matmul(&e_inv);
    let d = conj.interior_max_diff(r, poly)?;
    out.push(Check::at_most("E Q E^-1 = R", d / r.interior_max_abs(poly).max(1.0), tolerance));

    // exp(i eta R) exp(i eta S) = exp(-eta^2 [R,S] / 2) exp(i eta (R + S)).
    let u1 = &code.dissipators[0] + &id;
    let u2 = &code.dissipators[1] + &id;
    let joint = matrix_exponential(&(r + s).scale(i_times(eta)))?.scale(C64::from_polar(1.0, -eta * eta / 2.0));
    let d = u1.matmul(&u2).interior_max_diff(&joint, wide)?;
    out.push(Check::at_most("Glauber product", d, tolerance));

    let mut worst = 0.0f64;
    for k in 0..4 {
        for l in (k + 1)..4 {
            let c = code.dissipators[k].commutator(&code.dissipators[l]);
            worst = worst.max(c.interior_max_abs(wide));
        }
    }
    out.push(Check::at_most("[V_k, V_l] = 0", worst, tolerance));

    let n = make_number(dim)?;
    let nbar: f64 = code
        .codewords
        .iter()
        .map(|c| n.expectation(c).map(|z| z.re))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::at_most("codeword <n> / dim", nbar / dim as f64, 0.1));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::ETA_SQUARE;

    #[test]
    fn lambda_reduces_at_zero_epsilon() {
        // Lambda_- = exp(-i eta Q / 2) - exp(i eta Q / 2), so
        // Lambda_-^dagger Lambda_- = 2 (I - cos(eta Q)).
        let dim = 60;
        let eta = ETA_SQUARE;
        let (q, _) = make_quadratures(dim).unwrap();
        let a = matrix_exponential(&q.scale(i_times(-eta / 2.0))).unwrap();
        let b = matrix_exponential(&q.scale(i_times(eta / 2.0))).unwrap();
        let lam = &a - &b;
        let lhs = lam.adjoint().matmul(&lam);
        let cos_q = HermitianEigen::new(&q).unwrap().map(|x| (eta * x).cos());
        let id = TruncatedOperator::identity(dim).unwrap();
        let rhs = (&id - &cos_q).scale_real(2.0);
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
        assert!(hermitian_eigenvalues(lhs.as_array()).unwrap()[0] > -1e-10);
    }

    #[test]
    fn lambda_closed_form_small() {
        let dim = 200;
        let r = verify_lambda_closed_form(0.1, ETA_SQUARE, dim, InteriorBlock::wide_for(dim)).unwrap();
        assert!(r.max_deviation() < 1e-5, "{r:?}");
    }

    #[test]
    fn operator_inequality_small() {
        let dim = 200;
        let r = operator_inequality(0.1, ETA_SQUARE, dim, InteriorBlock::wide_for(dim)).unwrap();
        assert!(r.min_eigenvalue.iter().all(|&m| m >= -1e-6), "{r:?}");
    }

    #[test]
    fn derivative_identity_small() {
        let dim = 200;
        let code = GkpCode::build(GkpParameters::with_dim(0.1, ETA_SQUARE, dim).unwrap()).unwrap();
        let r = lyapunov_derivative_identity(&code, InteriorBlock::half_for(dim)).unwrap();
        assert!(r.commutator_form < 1e-5 && r.circulant_form < 1e-5, "{r:?}");
    }

    #[test]
    fn commutation_checks_pass() {
        let code = GkpCode::build(GkpParameters::with_dim(0.1, ETA_SQUARE, 200).unwrap()).unwrap();
        for c in commutation_suite(&code, 1e-6).unwrap() {
            assert!(c.passed, "{c}");
        }
    }
}
