//! Fock-basis simulation of dissipatively stabilized GKP grid states.
//!
//! The crate builds truncated quadrature operators, the four exponentiated
//! dissipators that stabilize a finite-energy GKP code, and integrates the
//! resulting master equation and its adjoint. The [`analysis`] module checks
//! the operator identities behind the exponential convergence bound and runs
//! the photon-loss experiments.

pub mod analysis;
pub mod code;
pub mod error;
pub mod exec;
pub mod expm;
pub mod fock;
pub mod hermite;
pub mod lindblad;
pub mod random;
pub mod spectral;

pub use num_complex::Complex64 as C64;

pub use code::{kappa, GkpCode, GkpParameters, Kappa, Lattice};
pub use error::{Error, Result};
pub use fock::{InteriorBlock, StateVector, TruncatedOperator};
