//! Seeded random density matrices.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fock::{check_dim, TruncatedOperator};
use crate::lindblad::DensityMatrix;

/// Ginibre ensemble restricted to the lowest `levels` Fock states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GinibreSpec {
    pub dim: usize,
    pub levels: usize,
    /// Number of Ginibre columns; `levels` gives the Hilbert–Schmidt measure.
    pub rank: usize,
    /// Samples with larger `<a^dagger a>` are redrawn.
    pub max_photon_number: f64,
}

impl GinibreSpec {
    /// Full-rank states on the lowest `dim / 4` levels with `<n>` capped at `dim / 4`.
    pub fn truncation_safe(dim: usize) -> Self {
        let levels = (dim / 4).max(2).min(dim);
        Self {
            dim,
            levels,
            rank: levels,
            max_photon_number: dim as f64 / 4.0,
        }
    }

    fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if self.levels == 0 || self.levels > self.dim || self.rank == 0 {
            return Err(Error::InvalidInput(format!("invalid random-state spec {self:?}")));
        }
        Ok(())
    }
}

const MAX_REDRAWS: usize = 1000;

fn photon_number(m: &Array2<C64>) -> f64 {
    m.diag().iter().enumerate().map(|(n, z)| n as f64 * z.re).sum()
}

fn draw(spec: &GinibreSpec, rng: &mut ChaCha8Rng) -> Array2<C64> {
    let g = Array2::from_shape_fn((spec.levels, spec.rank), |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let small = g.dot(&g.t().mapv(|z| z.conj()));
    let tr = small.diag().iter().map(|z| z.re).sum::<f64>();
    let mut m = Array2::zeros((spec.dim, spec.dim));
    m.slice_mut(ndarray::s![..spec.levels, ..spec.levels])
        .assign(&small.mapv(|z| z / tr));
    crate::fock::symmetrize_in_place(&mut m);
    m
}

/// Independent stream per `index` so batches are reproducible in any order.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_density_matrix(spec: &GinibreSpec, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    spec.validate()?;
    for _ in 0..MAX_REDRAWS {
        let m = draw(spec, rng);
        if photon_number(&m) <= spec.max_photon_number {
            return DensityMatrix::from_operator(TruncatedOperator::from_array_unchecked(m));
        }
    }
    Err(Error::InvalidInput(format!(
        "no sample met the photon-number cap {} after {MAX_REDRAWS} draws",
        spec.max_photon_number
    )))
}

/// Random Hermitian matrix with standard normal entries, unnormalized.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    let mut m = Array2::from_shape_fn((dim, dim), |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    crate::fock::symmetrize_in_place(&mut m);
    Ok(TruncatedOperator::from_array_unchecked(m))
}
