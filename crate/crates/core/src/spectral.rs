//! Hermitian eigendecompositions and functions of Hermitian operators.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{symmetrize_in_place, StateVector, TruncatedOperator};

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
}

impl HermitianEigen {
    /// Decomposes the Hermitian part of `op`.
    pub fn new(op: &TruncatedOperator) -> Result<Self> {
        Self::from_array(op.as_array())
    }

    pub fn from_array(m: &Array2<C64>) -> Result<Self> {
        let mut h = m.clone();
        symmetrize_in_place(&mut h);
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(
                "eigendecomposition of a non-finite operator".into(),
            ));
        }
        let (values, vectors) = eigh_column_major(h)?;
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.dim() - 1]
    }

    pub fn vector(&self, k: usize) -> StateVector {
        self.vectors.column(k).to_owned()
    }

    /// `U f(D) U^dagger`
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> TruncatedOperator {
        let n = self.dim();
        let fvals: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * fvals[j]);
        }
        let adj = self.vectors.t().mapv(|z| z.conj());
        let mut out = scaled.dot(&adj);
        symmetrize_in_place(&mut out);
        debug_assert_eq!(out.nrows(), n);
        TruncatedOperator::from_array_unchecked(out)
    }
}

fn eigh_column_major(h: Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    use ndarray::ShapeBuilder;
    let n = h.nrows();
    let mut f = Array2::<C64>::zeros((n, n).f());
    f.assign(&h);
    let (values, vectors) = f.eigh(UPLO::Upper)?;
    Ok((values, vectors))
}

/// Ascending eigenvalues of the Hermitian part of a square block.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Array1<f64>> {
    let mut h = m.clone();
    symmetrize_in_place(&mut h);
    let (values, _) = h.eigh(UPLO::Upper)?;
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::make_quadratures;

    #[test]
    fn reconstructs_operator() {
        let (q, p) = make_quadratures(12).unwrap();
        let h = &q.matmul(&q) + &p;
        let eig = HermitianEigen::new(&h).unwrap();
        let back = eig.map(|x| x);
        let d = back.max_abs_diff(&h).unwrap();
        assert!(d < 1e-12, "{d}");
        assert!(eig.values.windows(2).into_iter().all(|w| w[0] <= w[1]));
    }

    #[test]
    fn function_of_quadrature_squares() {
        let (q, _) = make_quadratures(10).unwrap();
        let eig = HermitianEigen::new(&q).unwrap();
        let sq = eig.map(|x| x * x);
        assert!(sq.max_abs_diff(&q.matmul(&q)).unwrap() < 1e-12);
    }
}
