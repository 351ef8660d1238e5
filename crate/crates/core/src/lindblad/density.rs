use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{StateVector, TruncatedOperator};
use crate::spectral::hermitian_eigenvalues;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTolerances {
    pub trace: f64,
    pub hermitian: f64,
    pub psd: f64,
}

impl Default for DensityTolerances {
    fn default() -> Self {
        Self {
            trace: 1e-8,
            hermitian: 1e-10,
            psd: 1e-8,
        }
    }
}

/// Validated density operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: TruncatedOperator,
    tolerances: DensityTolerances,
}

impl DensityMatrix {
    pub fn new(matrix: TruncatedOperator, tolerances: DensityTolerances) -> Result<Self> {
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tolerances.trace || trace.im.abs() > tolerances.trace {
            return Err(Error::InvalidInput(format!(
                "density matrix trace {trace} differs from 1 by more than {:.1e}",
                tolerances.trace
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tolerances.hermitian {
            return Err(Error::InvalidInput(format!(
                "density matrix not Hermitian: defect {defect:.3e}"
            )));
        }
        let min = hermitian_eigenvalues(matrix.as_array())?[0];
        if min < -tolerances.psd {
            return Err(Error::InvalidInput(format!(
                "density matrix not positive: min eigenvalue {min:.3e}"
            )));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            tolerances,
        })
    }

    pub fn from_operator(matrix: TruncatedOperator) -> Result<Self> {
        Self::new(matrix, DensityTolerances::default())
    }

    /// `|psi><psi| / <psi|psi>`
    pub fn pure(state: &StateVector) -> Result<Self> {
        let norm2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::InvalidInput("pure state must have nonzero norm".into()));
        }
        let op = TruncatedOperator::outer(state, state)?.scale_real(1.0 / norm2);
        Self::from_operator(op)
    }

    pub fn matrix(&self) -> &TruncatedOperator {
        &self.matrix
    }

    pub fn into_matrix(self) -> TruncatedOperator {
        self.matrix
    }

    pub fn tolerances(&self) -> DensityTolerances {
        self.tolerances
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use num_complex::Complex64 as C64;

    #[test]
    fn pure_state_is_valid() {
        let v = Array1::from(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let rho = DensityMatrix::pure(&v).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_trace_and_negativity() {
        let op = TruncatedOperator::identity(3).unwrap();
        assert!(DensityMatrix::from_operator(op.clone()).is_err());
        let diag = [C64::new(1.5, 0.0), C64::new(-0.5, 0.0)];
        let op = TruncatedOperator::from_diagonal(&diag).unwrap();
        assert!(DensityMatrix::from_operator(op).is_err());
    }
}
