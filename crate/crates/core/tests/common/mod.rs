//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use alr::data::Dataset;
use alr::regression::RidgeModel;
use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

/// Uniform features in [-2, 2], linear target plus small noise.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, d: usize) -> Dataset {
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = Array1::from_shape_fn(n, |i| {
        (0..d).map(|j| w[j] * x[[i, j]]).sum::<f64>() + 0.1 * rng.random_range(-1.0..1.0)
    });
    Dataset::from_arrays(x, y).unwrap()
}

/// First index with the strictly largest score.
pub fn scan_argmax(candidates: &[usize], scores: &[f64]) -> usize {
    let mut sorted: Vec<(usize, f64)> = candidates.iter().copied().zip(scores.iter().copied()).collect();
    sorted.sort_by_key(|(c, _)| *c);
    let mut best = sorted[0];
    for &(c, s) in &sorted[1..] {
        if s > best.1 {
            best = (c, s);
        }
    }
    best.0
}

fn predict(model: &RidgeModel, x: ArrayView1<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for (w, v) in model.weights().iter().zip(x.iter()) {
        acc += w * v;
    }
    acc + model.intercept()
}

/// Committee variance with divisor P.
pub fn qbc_oracle(ds: &Dataset, committee: &[RidgeModel], candidates: &[usize]) -> usize {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            let preds: Vec<f64> = committee.iter().map(|m| predict(m, ds.row(c))).collect();
            let mean = preds.iter().sum::<f64>() / preds.len() as f64;
            preds.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / preds.len() as f64
        })
        .collect();
    scan_argmax(candidates, &scores)
}

/// Mean over the committee of |y_p - y_hat| * ||x||.
pub fn emcm_oracle(ds: &Dataset, master: &RidgeModel, committee: &[RidgeModel], candidates: &[usize]) -> usize {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            let x = ds.row(c);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y_hat = predict(master, x);
            committee.iter().map(|m| (predict(m, x) - y_hat).abs() * norm).sum::<f64>() / committee.len() as f64
        })
        .collect();
    scan_argmax(candidates, &scores)
}

/// Candidate maximizing the distance to its nearest labeled sample.
pub fn gs_oracle(ds: &Dataset, labeled: &[usize], candidates: &[usize]) -> usize {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            labeled
                .iter()
                .map(|&l| {
                    ds.row(c)
                        .iter()
                        .zip(ds.row(l).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    scan_argmax(candidates, &scores)
}

/// Minimum SSE over every assignment of the rows to `k` labels.
pub fn brute_force_sse(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sse = 0.0;
        for c in 0..k {
            let members: Vec<&Vec<f64>> = points.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            for j in 0..d {
                let mean = members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64;
                sse += members.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>();
            }
        }
        best = best.min(sse);
        // Next assignment in base k.
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

/// Sample correlation computed directly from its definition.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
