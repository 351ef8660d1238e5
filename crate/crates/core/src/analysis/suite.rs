//! The combined identity checks behind `gkp-sim check`.

use serde::{Deserialize, Serialize};

use crate::analysis::check::Check;
use crate::analysis::identities::{
    commutation_suite, lyapunov_derivative_identity, operator_inequality, verify_lambda_closed_form,
};
use crate::analysis::tmatrix::{build_t_matrix, verify_t_spectrum};
use crate::code::{default_dim, GkpCode, GkpParameters, ETA_SQUARE};
use crate::error::Result;
use crate::fock::InteriorBlock;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationConfig {
    pub epsilon: f64,
    pub eta: f64,
    /// Defaults to the truncation rule.
    pub dim: Option<usize>,
    pub t_matrix_tol: f64,
    pub identity_tol: f64,
    pub lambda_tol: f64,
    /// Lower bound on the smallest interior eigenvalue in the operator inequality.
    pub inequality_floor: f64,
    pub commutation_tol: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            eta: ETA_SQUARE,
            dim: None,
            t_matrix_tol: 1e-10,
            identity_tol: 1e-5,
            lambda_tol: 1e-5,
            inequality_floor: -1e-6,
            commutation_tol: 1e-6,
        }
    }
}

impl VerificationConfig {
    pub fn resolved_dim(&self) -> usize {
        self.dim.unwrap_or_else(|| default_dim(self.epsilon))
    }
}

/// T-matrix spectrum, Heisenberg derivative of `W`, the `Lambda` closed
/// forms, the operator inequality and the commutation structure.
pub fn verification_suite(config: &VerificationConfig) -> Result<Vec<Check>> {
    let dim = config.resolved_dim();
    let (eps, eta) = (config.epsilon, config.eta);
    let mut out = Vec::new();

    let t = verify_t_spectrum(&build_t_matrix(eps, eta), config.t_matrix_tol)?;
    let tol = config.t_matrix_tol;
    out.push(Check::at_most("T eigenvalues", t.eigenvalue_error, tol));
    out.push(Check::at_most("T eigenvector residual", t.residual, tol));
    out.push(Check::at_most("T reconstruction", t.reconstruction_error, tol));
    out.push(Check::at_most("T eigenprojectors", t.projector_error, tol));

    let code = GkpCode::build(GkpParameters::with_dim(eps, eta, dim)?)?;
    let w = lyapunov_derivative_identity(&code, InteriorBlock::half_for(dim))?;
    out.push(Check::at_most("dW/dt commutator form", w.commutator_form, config.identity_tol));
    out.push(Check::at_most("dW/dt circulant form", w.circulant_form, config.identity_tol));

    let lambda = verify_lambda_closed_form(eps, eta, dim, InteriorBlock::wide_for(dim))?;
    out.push(Check::at_most("Lambda+ closed form", lambda.deviation[0], config.lambda_tol));
    out.push(Check::at_most("Lambda- closed form", lambda.deviation[1], config.lambda_tol));

    let ineq = operator_inequality(eps, eta, dim, InteriorBlock::wide_for(dim))?;
    out.push(Check::at_least("inequality (-)", ineq.min_eigenvalue[0], config.inequality_floor));
    out.push(Check::at_least("inequality (+)", ineq.min_eigenvalue[1], config.inequality_floor));

    out.extend(commutation_suite(&code, config.commutation_tol)?);
    Ok(out)
}
