//! Verification of the convergence proof machinery and photon-loss experiments.

mod check;
mod experiment;
mod fit;
mod identities;
mod lyapunov;
mod suite;
mod tmatrix;

pub use check::Check;
pub use identities::{
    commutation_suite, lyapunov_derivative_identity, operator_inequality, verify_lambda_closed_form,
    LambdaReport, LyapunovIdentityReport, OperatorInequalityReport,
};
pub use tmatrix::{build_t_matrix, verify_t_spectrum, CirculantTMatrix, TEigenpair, TSpectrumReport};
pub use experiment::{error_rate_experiment, truncation_convergence, ErrorRateConfig, ExperimentReport, TruncationReport};
pub use fit::log_slope;
pub use suite::{verification_suite, VerificationConfig};
pub use lyapunov::{
    lyapunov_decay_experiment, lyapunov_decay_trials, random_initial_states, InitialState, LyapunovConfig, LyapunovReport,
    TrialOutcome,
};
