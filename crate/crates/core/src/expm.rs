//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13), following Higham's 2005 selection thresholds.

use ndarray::{Array2, Axis};
use ndarray_linalg::{FactorizeInto, Solve};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::TruncatedOperator;

// 1-norm bounds below which the degree-m approximant reaches double precision.
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn axpy_identity(m: &mut Array2<C64>, c: f64) {
    for d in m.diag_mut() {
        *d += c;
    }
}

fn combine(terms: &[(f64, &Array2<C64>)], n: usize) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros((n, n));
    for (c, t) in terms {
        out.scaled_add(C64::new(*c, 0.0), t);
    }
    out
}

/// Odd and even parts `(U, V)` of the degree-m Padé numerator, m <= 9.
fn pade_low(a: &Array2<C64>, b: &[f64]) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut powers = vec![Array2::<C64>::eye(n), a2.clone()];
    let m = b.len() - 1;
    while 2 * (powers.len() - 1) < m {
        let next = powers.last().unwrap().dot(&a2);
        powers.push(next);
    }
    let mut u_inner = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 <= m {
            u_inner.scaled_add(C64::new(b[2 * k + 1], 0.0), p);
        }
        if 2 * k <= m {
            v.scaled_add(C64::new(b[2 * k], 0.0), p);
        }
    }
    (a.dot(&u_inner), v)
}

fn pade_13(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let b = &PADE_13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = combine(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let mut u = a6.dot(&inner_u);
    u.scaled_add(C64::new(b[7], 0.0), &a6);
    u.scaled_add(C64::new(b[5], 0.0), &a4);
    u.scaled_add(C64::new(b[3], 0.0), &a2);
    axpy_identity(&mut u, b[1]);
    let u = a.dot(&u);

    let inner_v = combine(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let mut v = a6.dot(&inner_v);
    v.scaled_add(C64::new(b[6], 0.0), &a6);
    v.scaled_add(C64::new(b[4], 0.0), &a4);
    v.scaled_add(C64::new(b[2], 0.0), &a2);
    axpy_identity(&mut v, b[0]);
    (u, v)
}

/// Solves `(V - U) X = (V + U)` column by column on one LU factorization.
fn pade_solve(u: &Array2<C64>, v: &Array2<C64>) -> Result<Array2<C64>> {
    let denom = v - u;
    let numer = v + u;
    let lu = denom.factorize_into()?;
    let mut out = Array2::<C64>::zeros(numer.raw_dim());
    for (j, col) in numer.axis_iter(Axis(1)).enumerate() {
        let x = lu.solve(&col.to_owned())?;
        out.column_mut(j).assign(&x);
    }
    Ok(out)
}

fn all_finite(m: &Array2<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `exp(M)` for a dense complex matrix.
pub fn matrix_exponential(op: &TruncatedOperator) -> Result<TruncatedOperator> {
    if !op.is_finite() {
        return Err(Error::InvalidInput(
            "matrix exponential of an operator with non-finite entries".into(),
        ));
    }
    let norm = op.norm_one();
    let a = op.as_array();

    let result = if norm <= THETA_3 {
        let (u, v) = pade_low(a, &PADE_3);
        pade_solve(&u, &v)?
    } else if norm <= THETA_5 {
        let (u, v) = pade_low(a, &PADE_5);
        pade_solve(&u, &v)?
    } else if norm <= THETA_7 {
        let (u, v) = pade_low(a, &PADE_7);
        pade_solve(&u, &v)?
    } else if norm <= THETA_9 {
        let (u, v) = pade_low(a, &PADE_9);
        pade_solve(&u, &v)?
    } else {
        let squarings = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scaled = a.mapv(|z| z / 2f64.powi(squarings));
        let (u, v) = pade_13(&scaled);
        let mut r = pade_solve(&u, &v)?;
        for _ in 0..squarings {
            r = r.dot(&r);
            if !all_finite(&r) {
                return Err(Error::Overflow { norm });
            }
        }
        r
    };
    if !all_finite(&result) {
        return Err(Error::Overflow { norm });
    }
    Ok(TruncatedOperator::from_array_unchecked(result))
}
