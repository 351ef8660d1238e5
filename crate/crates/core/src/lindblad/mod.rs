//! Lindblad master equation, its adjoint and the steady logical observables.

mod density;
mod evolve;
mod integrate;
mod logical;
mod model;

pub use density::{DensityMatrix, DensityTolerances};
pub use evolve::{evolve, evolve_adjoint, ObservableSpec, Record, Trajectory, POSITIVITY_WARNING};
pub use integrate::{Scheme, SolverOptions, SolverStats};
pub use logical::{
    bloch_coordinates, bloch_of_operator, logical_operators, steady_observable, LogicalMethod, LogicalOperators,
    LogicalOptions, SteadyObservable,
    BLOCH_IMAG_TOL,
};
pub use model::{adjoint_rhs, lindblad_rhs, Channel, LindbladModel, NoiseKind};
