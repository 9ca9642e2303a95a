//! Closed-form ridge regression with an unpenalized intercept.
//!
//! The intercept is absorbed by centering the training rows; the weights
//! solve `(Xc'Xc + sigma I) w = Xc'yc` through a Cholesky factorization.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ridge parameter used throughout the benchmark.
pub const DEFAULT_SIGMA: f64 = 0.01;

/// Default committee size for bootstrap committees.
pub const DEFAULT_COMMITTEE_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    weights: Vec<f64>,
    intercept: f64,
    sigma: f64,
}

impl RidgeModel {
    pub fn new(weights: Vec<f64>, intercept: f64, sigma: f64) -> Self {
        Self {
            weights,
            intercept,
            sigma,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// Prediction for a single feature vector. Panics on length mismatch.
    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> f64 {
        assert_eq!(row.len(), self.weights.len(), "feature count mismatch");
        row.iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum::<f64>()
            + self.intercept
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.ncols(),
            });
        }
        Ok(x.rows().into_iter().map(|r| self.predict_row(r)).collect())
    }
}

struct CenteredSystem {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

fn centered_system(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> CenteredSystem {
    let (m, d) = x.dim();
    let x_mean: Vec<f64> = x.mean_axis(Axis(0)).expect("m >= 1").to_vec();
    let y_mean = y.sum() / m as f64;

    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    let mut centered = vec![0.0; d];
    for (row, &yi) in x.rows().into_iter().zip(y.iter()) {
        for j in 0..d {
            centered[j] = row[j] - x_mean[j];
        }
        let yc = yi - y_mean;
        for a in 0..d {
            rhs[a] += centered[a] * yc;
            for b in 0..=a {
                gram[(a, b)] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    CenteredSystem {
        gram,
        rhs,
        x_mean,
        y_mean,
    }
}

pub fn fit_ridge(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, sigma: f64) -> Result<RidgeModel> {
    let (m, d) = x.dim();
    if m == 0 {
        return Err(Error::invalid("ridge fit needs at least one row"));
    }
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: y.len(),
        });
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(format!("sigma must be a nonnegative finite number, got {sigma}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in ridge inputs"));
    }

    let system = centered_system(x, y);
    let mut lhs = system.gram.clone();
    for j in 0..d {
        lhs[(j, j)] += sigma;
    }

    let chol = lhs.clone().cholesky().ok_or(Error::Singular)?;
    if sigma == 0.0 {
        let diag = chol.l_dirty().diagonal();
        let max = diag.iter().cloned().fold(0.0_f64, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == 0.0 || (min / max).powi(2) < 1e-13 {
            return Err(Error::Singular);
        }
    }
    let mut w = chol.solve(&system.rhs);
    // One step of iterative refinement tightens the normal-equation residual.
    let residual = &system.rhs - &lhs * &w;
    w += chol.solve(&residual);

    let intercept = system.y_mean
        - w.iter()
            .zip(&system.x_mean)
            .map(|(wi, xi)| wi * xi)
            .sum::<f64>();
    let weights: Vec<f64> = w.iter().copied().collect();
    if !intercept.is_finite() || weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(RidgeModel {
        weights,
        intercept,
        sigma,
    })
}

/// Normal-equation residual `||Xc'(Xc w - yc) + sigma w||` and the
/// tolerance scale `1 + ||Xc'yc||` for a fitted model.
pub fn stationarity_residual(
    model: &RidgeModel,
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> (f64, f64) {
    let system = centered_system(x, y);
    let w = DVector::from_column_slice(model.weights());
    let r = &system.gram * &w - &system.rhs + &w * model.sigma();
    (r.norm(), 1.0 + system.rhs.norm())
}

/// Draws `committee_size` bootstrap resamples of `m` row indices, each of size
/// `m`, uniformly with replacement.
pub fn bootstrap_indices<R: Rng + ?Sized>(m: usize, committee_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    (0..committee_size)
        .map(|_| (0..m).map(|_| rng.random_range(0..m)).collect())
        .collect()
}

/// Fits one ridge model per bootstrap resample, in draw order.
pub fn bootstrap_committee<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    committee_size: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<RidgeModel>> {
    let m = x.nrows();
    if m == 0 {
        return Err(Error::invalid("bootstrap needs at least one labeled row"));
    }
    if committee_size < 2 {
        return Err(Error::invalid("committee size must be at least 2"));
    }
    bootstrap_indices(m, committee_size, rng)
        .into_iter()
        .map(|idx| {
            let xs = x.select(Axis(0), &idx);
            let ys = y.select(Axis(0), &idx);
            fit_ridge(xs.view(), ys.view(), sigma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_target_gives_zero_model() {
        let x = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]];
        let m = fit_ridge(x.view(), array![0.0, 0.0, 0.0].view(), 0.01).unwrap();
        assert!(m.weights().iter().all(|w| *w == 0.0));
        assert_eq!(m.intercept(), 0.0);
    }

    #[test]
    fn one_dimensional_hand_solution() {
        // Centered x = {-1,0,1}, y_c = {-1,0,1}: w = 2 / (2 + 0.01).
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![1.0, 2.0, 3.0];
        let m = fit_ridge(x.view(), y.view(), 0.01).unwrap();
        let w = 2.0 / 2.01;
        assert!((m.weights()[0] - w).abs() < 1e-12);
        assert!((m.intercept() - (2.0 - 2.0 * w)).abs() < 1e-12);
        assert!((m.weights()[0] - 0.995025).abs() < 1e-6);
        assert!((m.intercept() - 0.009950).abs() < 1e-6);
        let at_two = m.predict_row(array![2.0].view());
        assert!((at_two - 2.0).abs() < 1e-12);
    }

    #[test]
    fn huge_sigma_shrinks_to_mean() {
        let x = array![[1.0, 0.0], [2.0, 1.0], [4.0, -3.0], [0.0, 2.0]];
        let y = array![3.0, -1.0, 2.0, 7.0];
        let m = fit_ridge(x.view(), y.view(), 1e12).unwrap();
        assert!(m.weights().iter().all(|w| w.abs() < 1e-6));
        assert!((m.intercept() - 2.75).abs() < 1e-6);
    }

    #[test]
    fn predict_constant_and_centroid() {
        let m = RidgeModel::new(vec![0.0, 0.0], 3.0, 0.01);
        let p = m.predict(Array2::<f64>::ones((4, 2)).view()).unwrap();
        assert!(p.iter().all(|v| *v == 3.0));

        let x = array![[1.0, 4.0], [2.0, 1.0], [6.0, 0.0], [3.0, 3.0]];
        let y = array![1.0, 5.0, -2.0, 0.5];
        let fit = fit_ridge(x.view(), y.view(), 0.01).unwrap();
        let mean = x.mean_axis(Axis(0)).unwrap();
        assert!((fit.predict_row(mean.view()) - y.mean().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn predict_rejects_wrong_width() {
        let m = RidgeModel::new(vec![1.0, 2.0], 0.0, 0.01);
        assert!(matches!(
            m.predict(Array2::<f64>::zeros((2, 3)).view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigma_zero_rank_deficient_is_singular() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let y = array![1.0, 2.0, 3.0];
        assert!(matches!(fit_ridge(x.view(), y.view(), 0.0), Err(Error::Singular)));
        assert!(fit_ridge(x.view(), y.view(), 0.01).is_ok());
    }

    #[test]
    fn non_finite_input_rejected() {
        let x = array![[1.0], [f64::NAN]];
        assert!(fit_ridge(x.view(), array![1.0, 2.0].view(), 0.01).is_err());
    }

    #[test]
    fn affine_target_interpolated_exactly_with_sigma_zero() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [2.0, 3.0], [-1.0, 4.0], [0.5, -2.0]];
        let y: Array1<f64> = x.rows().into_iter().map(|r| 2.0 * r[0] - 3.0 * r[1] + 1.5).collect();
        let m = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        let p = m.predict(x.view()).unwrap();
        for (a, b) in p.iter().zip(y.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn single_row_committee_is_identical() {
        let x = array![[1.0, 2.0]];
        let y = array![3.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let committee = bootstrap_committee(x.view(), y.view(), 5, 0.01, &mut rng).unwrap();
        assert_eq!(committee.len(), 5);
        assert!(committee.windows(2).all(|w| w[0] == w[1]));
        assert!(committee[0].weights().iter().all(|w| *w == 0.0));
        assert_eq!(committee[0].intercept(), 3.0);
    }

    #[test]
    fn committee_is_deterministic_given_seed() {
        let x = array![[1.0, 2.0], [0.0, 1.0], [3.0, -1.0], [2.0, 2.0], [1.0, -1.0]];
        let y = array![1.0, 0.0, 2.0, -1.0, 0.5];
        let a = bootstrap_committee(x.view(), y.view(), 4, 0.01, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = bootstrap_committee(x.view(), y.view(), 4, 0.01, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn committee_rejects_small_size() {
        let x = array![[1.0]];
        let y = array![1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(bootstrap_committee(x.view(), y.view(), 1, 0.01, &mut rng).is_err());
    }
}
