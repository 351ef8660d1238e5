//! Operator algebra on the truncated Fock space `span{|0>, .., |dim-1>}`.
//!
//! Every operator is stored as a dense complex matrix. The canonical
//! commutation relation `[Q, P] = i` cannot hold exactly in finite dimension:
//! it fails at the truncation corner. Identities from the infinite-dimensional
//! theory are therefore asserted on an [`InteriorBlock`], the leading principal
//! submatrix that stays away from the highest Fock levels.

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{s, Array1, Array2, ArrayView2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Fock-basis state vector.
pub type StateVector = Array1<C64>;

/// Dense complex square matrix acting on the truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    m: Array2<C64>,
}

/// Leading `(dim - margin) x (dim - margin)` block on which operator
/// identities are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InteriorBlock {
    margin: usize,
}

impl InteriorBlock {
    pub fn new(margin: usize, dim: usize) -> Result<Self> {
        if margin >= dim {
            return Err(Error::InvalidInput(format!(
                "interior margin {margin} must be smaller than the dimension {dim}"
            )));
        }
        Ok(Self { margin })
    }

    /// Default margin `ceil(dim / 10)`, adequate for polynomial identities.
    pub fn default_for(dim: usize) -> Self {
        Self {
            margin: dim.div_ceil(10).min(dim - 1),
        }
    }

    /// Margin `ceil(2 dim / 5)` for identities between exponentiated
    /// quadratures. Truncation errors of `exp(i eta R)` reach far below the
    /// corner because the exponential couples each level to its neighbours
    /// a few dozen rungs away.
    pub fn wide_for(dim: usize) -> Self {
        Self {
            margin: (2 * dim).div_ceil(5).min(dim - 1),
        }
    }

    /// Margin `ceil(dim / 2)` for identities that multiply several
    /// exponentials of non-Hermitian quadratures.
    pub fn half_for(dim: usize) -> Self {
        Self {
            margin: dim.div_ceil(2).min(dim - 1),
        }
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn size(&self, dim: usize) -> usize {
        dim - self.margin
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::InvalidDimension { dim })
    } else {
        Ok(())
    }
}

impl TruncatedOperator {
    pub fn from_array(m: Array2<C64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::Shape {
                expected: r,
                found: c,
            });
        }
        check_dim(r)?;
        Ok(Self { m })
    }

    pub(crate) fn from_array_unchecked(m: Array2<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: Array2::zeros((dim, dim)),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: Array2::eye(dim),
        })
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(Self {
            m: Array2::from_diag(&Array1::from(diag.to_vec())),
        })
    }

    /// `|a><b|`
    pub fn outer(a: &StateVector, b: &StateVector) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Shape {
                expected: a.len(),
                found: b.len(),
            });
        }
        check_dim(a.len())?;
        let m = Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j].conj());
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_array(self) -> Array2<C64> {
        self.m
    }

    pub fn view(&self) -> ArrayView2<'_, C64> {
        self.m.view()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn ensure_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.t().mapv(|z| z.conj()),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            m: self.m.dot(&other.m),
        }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.ensure_same_dim(other)?;
        Ok(self.matmul(other))
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(self.m.dot(v))
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            m: self.m.dot(&other.m) - other.m.dot(&self.m),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            m: self.m.mapv(|x| x * z),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        Self {
            m: self.m.mapv(|z| z * x),
        }
    }

    pub fn trace(&self) -> C64 {
        self.m.diag().sum()
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        self.ensure_same_dim(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for ((k, l), x) in self.m.indexed_iter() {
            acc += x * other.m[(l, k)];
        }
        Ok(acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        self.m
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |A - A^dagger|`
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |U^dagger U - I|`
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().matmul(self);
        max_abs_diff_identity(g.view())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// `(A + A^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        let mut m = self.m.clone();
        symmetrize_in_place(&mut m);
        Self { m }
    }

    pub fn interior(&self, block: InteriorBlock) -> ArrayView2<'_, C64> {
        let k = block.size(self.dim());
        self.m.slice(s![..k, ..k])
    }

    /// Largest entrywise deviation between two operators on an interior block.
    pub fn interior_max_diff(&self, other: &Self, block: InteriorBlock) -> Result<f64> {
        self.ensure_same_dim(other)?;
        let a = self.interior(block);
        let b = other.interior(block);
        Ok(Zip::from(&a)
            .and(&b)
            .fold(0.0f64, |acc, x, y| acc.max((x - y).norm())))
    }

    pub fn interior_max_abs(&self, block: InteriorBlock) -> f64 {
        self.interior(block)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same_dim(other)?;
        Ok(Zip::from(&self.m)
            .and(&other.m)
            .fold(0.0f64, |acc, x, y| acc.max((x - y).norm())))
    }

    /// Expectation value `<v|A|v>`.
    pub fn expectation(&self, v: &StateVector) -> Result<C64> {
        let av = self.apply(v)?;
        Ok(v.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum())
    }
}

pub(crate) fn symmetrize_in_place(m: &mut Array2<C64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub(crate) fn max_abs_diff_identity(m: ArrayView2<'_, C64>) -> f64 {
    let mut worst = 0.0f64;
    for ((i, j), z) in m.indexed_iter() {
        let d = if i == j { *z - 1.0 } else { *z };
        worst = worst.max(d.norm());
    }
    worst
}

impl Add for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn add(self, rhs: Self) -> TruncatedOperator {
        TruncatedOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn sub(self, rhs: Self) -> TruncatedOperator {
        TruncatedOperator { m: &self.m - &rhs.m }
    }
}

impl Mul for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn mul(self, rhs: Self) -> TruncatedOperator {
        self.matmul(rhs)
    }
}

impl Neg for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn neg(self) -> TruncatedOperator {
        TruncatedOperator { m: -&self.m }
    }
}

/// Annihilation operator `a` with `<n-1|a|n> = sqrt(n)`.
pub fn make_ladder(dim: usize) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(TruncatedOperator { m })
}

/// Photon-number operator `a^dagger a = diag(0, 1, .., dim-1)`.
pub fn make_number(dim: usize) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    let diag: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    TruncatedOperator::from_diagonal(&diag)
}

/// Position and momentum quadratures `Q = (a + a^dagger)/sqrt2`,
/// `P = (a - a^dagger)/(i sqrt2)`.
pub fn make_quadratures(dim: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    check_dim(dim)?;
    let mut q = Array2::zeros((dim, dim));
    let mut p = Array2::zeros((dim, dim));
    for n in 1..dim {
        let x = (n as f64 / 2.0).sqrt();
        q[(n - 1, n)] = C64::new(x, 0.0);
        q[(n, n - 1)] = C64::new(x, 0.0);
        // (a - a^dagger) / (i sqrt2): -i x above the diagonal, +i x below.
        p[(n - 1, n)] = C64::new(0.0, -x);
        p[(n, n - 1)] = C64::new(0.0, x);
    }
    Ok((TruncatedOperator { m: q }, TruncatedOperator { m: p }))
}

/// Frobenius inner product `Tr(A^dagger B)`.
pub fn frobenius_inner(a: &TruncatedOperator, b: &TruncatedOperator) -> Result<C64> {
    a.ensure_same_dim(b)?;
    Ok(Zip::from(&a.m)
        .and(&b.m)
        .fold(C64::new(0.0, 0.0), |acc, x, y| acc + x.conj() * y))
}

pub fn inner(a: &StateVector, b: &StateVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vector_norm(v: &StateVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
