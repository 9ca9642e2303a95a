//! Seeded synthetic regression problems for tests, examples and smoke runs.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{zscore_columns, Dataset};
use crate::error::{Error, Result};

/// Parameters of [`two_blobs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBlobConfig {
    pub n: usize,
    pub d: usize,
    /// Distance between the blob centers, in units of the within-blob sd.
    pub separation: f64,
    /// Fraction of samples in the first blob.
    pub first_share: f64,
    pub noise_sd: f64,
}

impl Default for TwoBlobConfig {
    fn default() -> Self {
        Self {
            n: 200,
            d: 5,
            separation: 6.0,
            first_share: 0.5,
            noise_sd: 0.5,
        }
    }
}

/// Two isotropic Gaussian blobs with a linear target plus Gaussian noise.
///
/// Centers sit at `0` and `separation * u` for a random unit vector `u`; the
/// weights are standard normal draws. Features are z-scored; the target is
/// left in its own units.
pub fn two_blobs(config: TwoBlobConfig, seed: u64) -> Result<Dataset> {
    let TwoBlobConfig {
        n,
        d,
        separation,
        first_share,
        noise_sd,
    } = config;
    if d == 0 || n < d + 1 {
        return Err(Error::invalid(format!("two_blobs needs d >= 1 and n > d, got n = {n}, d = {d}")));
    }
    if !(0.0..=1.0).contains(&first_share) || noise_sd.is_nan() || noise_sd < 0.0 {
        return Err(Error::invalid("first_share must lie in [0, 1] and noise_sd must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };

    let mut direction: Vec<f64> = (0..d).map(|_| normal()).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    direction.iter_mut().for_each(|v| *v *= separation / norm);
    let weights: Vec<f64> = (0..d).map(|_| normal()).collect();

    let first = (first_share * n as f64).round() as usize;
    let mut x = Array2::zeros((n, d));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut target = 0.0;
        for j in 0..d {
            let center = if i < first { 0.0 } else { direction[j] };
            let v = center + normal();
            x[[i, j]] = v;
            target += weights[j] * v;
        }
        y[i] = target + noise_sd * normal();
    }
    zscore_columns(&mut x);
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new(x, y, names)
}
