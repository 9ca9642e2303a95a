//! Seeded k-means (Lloyd iterations from k-means++ seeding, best of several
//! restarts) and the closest-to-centroid member lookup.
//!
//! All ties break to the lowest index: nearest centroid, closest member and
//! equal-SSE restarts (earliest wins).

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
        }
    }
}

/// Result of a k-means run over `N` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    /// Cluster of each row, in `[0, k)`.
    pub assignments: Vec<usize>,
    /// `k x d` centroid matrix.
    pub centroids: Array2<f64>,
    pub sizes: Vec<usize>,
    pub sse: f64,
}

impl Clustering {
    /// Row positions belonging to `cluster`, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a == cluster).then_some(i))
            .collect()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Row-major contiguous copy of the data.
struct Points {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Points {
    fn new(x: ArrayView2<'_, f64>) -> Self {
        let (n, d) = x.dim();
        Self {
            data: x.iter().copied().collect(),
            n,
            d,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn seed_plus_plus<R: Rng + ?Sized>(pts: &Points, k: usize, rng: &mut R) -> Vec<f64> {
    let d = pts.d;
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.random_range(0..pts.n);
    centroids.extend_from_slice(pts.row(first));
    let mut nearest: Vec<f64> = (0..pts.n).map(|i| sq_dist(pts.row(i), pts.row(first))).collect();

    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, w) in nearest.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just below `target`; take the last
            // candidate with positive weight.
            chosen.unwrap_or_else(|| nearest.iter().rposition(|w| *w > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..pts.n)
        };
        centroids.extend_from_slice(pts.row(pick));
        for (i, near) in nearest.iter_mut().enumerate() {
            let dist = sq_dist(pts.row(i), pts.row(pick));
            if dist < *near {
                *near = dist;
            }
        }
    }
    centroids
}

/// Assigns every point to its nearest centroid. Returns whether any
/// assignment changed and writes each point's squared distance.
fn assign(pts: &Points, centroids: &[f64], k: usize, assignments: &mut [usize], dist: &mut [f64]) -> bool {
    let d = pts.d;
    let mut changed = false;
    for i in 0..pts.n {
        let row = pts.row(i);
        let mut best = 0;
        let mut best_d = sq_dist(row, &centroids[..d]);
        for c in 1..k {
            let dc = sq_dist(row, &centroids[c * d..(c + 1) * d]);
            if dc < best_d {
                best = c;
                best_d = dc;
            }
        }
        if assignments[i] != best {
            assignments[i] = best;
            changed = true;
        }
        dist[i] = best_d;
    }
    changed
}

fn update(pts: &Points, k: usize, assignments: &[usize], centroids: &mut [f64]) {
    let d = pts.d;
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for i in 0..pts.n {
        let c = assignments[i];
        counts[c] += 1;
        for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(pts.row(i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..d {
                centroids[c * d + j] = sums[c * d + j] / counts[c] as f64;
            }
        }
    }

    // Reseed empty clusters with the point farthest from its own centroid.
    let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut far: Vec<f64> = (0..pts.n)
        .map(|i| {
            let c = assignments[i];
            sq_dist(pts.row(i), &centroids[c * d..(c + 1) * d])
        })
        .collect();
    for c in empty {
        let mut pick = 0;
        for i in 1..pts.n {
            if far[i] > far[pick] {
                pick = i;
            }
        }
        centroids[c * d..(c + 1) * d].copy_from_slice(pts.row(pick));
        far[pick] = -1.0;
    }
}

/// One Lloyd run. Also returns the SSE after every assignment step.
fn lloyd<R: Rng + ?Sized>(pts: &Points, k: usize, max_iter: usize, rng: &mut R) -> (Clustering, Vec<f64>) {
    let mut centroids = seed_plus_plus(pts, k, rng);
    let mut assignments = vec![usize::MAX; pts.n];
    let mut dist = vec![0.0; pts.n];
    let mut history = Vec::new();
    let mut iter = 0;
    loop {
        let changed = assign(pts, &centroids, k, &mut assignments, &mut dist);
        history.push(dist.iter().sum());
        iter += 1;
        if !changed || iter >= max_iter {
            break;
        }
        update(pts, k, &assignments, &mut centroids);
    }

    let mut sizes = vec![0; k];
    for &a in &assignments {
        sizes[a] += 1;
    }
    let sse = *history.last().expect("at least one assignment step");
    let clustering = Clustering {
        k,
        assignments,
        centroids: Array2::from_shape_vec((k, pts.d), centroids).expect("k x d"),
        sizes,
        sse,
    };
    (clustering, history)
}

fn check_input(x: ArrayView2<'_, f64>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k > x.nrows() {
        return Err(Error::invalid(format!("k = {k} exceeds the number of points {}", x.nrows())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k-means input contains non-finite values"));
    }
    Ok(())
}

/// Best-of-`restarts` k-means. Restarts draw from `rng` in sequence, so the
/// result is a pure function of the rng state.
pub fn kmeans<R: Rng + ?Sized>(x: ArrayView2<'_, f64>, k: usize, rng: &mut R, config: KMeansConfig) -> Result<Clustering> {
    check_input(x, k)?;
    if config.restarts == 0 || config.max_iter == 0 {
        return Err(Error::invalid("restarts and max_iter must be positive"));
    }
    let pts = Points::new(x);
    let mut best: Option<Clustering> = None;
    for _ in 0..config.restarts {
        let (run, _) = lloyd(&pts, k, config.max_iter, rng);
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Single Lloyd run together with the per-iteration SSE trace.
pub fn kmeans_single_run_trace<R: Rng + ?Sized>(
    x: ArrayView2<'_, f64>,
    k: usize,
    max_iter: usize,
    rng: &mut R,
) -> Result<(Clustering, Vec<f64>)> {
    check_input(x, k)?;
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be positive"));
    }
    Ok(lloyd(&Points::new(x), k, max_iter, rng))
}

/// The member whose row is nearest (Euclidean) to `centroid`; ties go to the
/// lowest index.
pub fn closest_to_centroid(members: &[usize], x: ArrayView2<'_, f64>, centroid: ArrayView1<'_, f64>) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &m in members {
        let dist: f64 = x
            .row(m)
            .iter()
            .zip(centroid.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let better = match best {
            None => true,
            Some((bd, bi)) => dist < bd || (dist == bd && m < bi),
        };
        if better {
            best = Some((dist, m));
        }
    }
    best.map(|(_, i)| i)
        .ok_or_else(|| Error::invalid("closest_to_centroid on an empty member list"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [5.0, 5.0]];
        let c = kmeans(x.view(), 4, &mut rng(3), KMeansConfig::default()).unwrap();
        assert_eq!(c.sse, 0.0);
        assert!(c.sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn k_one_is_column_means() {
        let x = array![[0.0, 1.0], [2.0, 3.0], [4.0, -1.0]];
        let c = kmeans(x.view(), 1, &mut rng(0), KMeansConfig::default()).unwrap();
        assert!(c.assignments.iter().all(|&a| a == 0));
        assert!((c.centroids[[0, 0]] - 2.0).abs() < 1e-12);
        assert!((c.centroids[[0, 1]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors_on_bad_k_and_nan() {
        let x = array![[0.0], [1.0]];
        assert!(kmeans(x.view(), 0, &mut rng(0), KMeansConfig::default()).is_err());
        assert!(kmeans(x.view(), 3, &mut rng(0), KMeansConfig::default()).is_err());
        let bad = array![[0.0], [f64::NAN]];
        assert!(kmeans(bad.view(), 1, &mut rng(0), KMeansConfig::default()).is_err());
    }

    #[test]
    fn duplicate_points_keep_k_clusters_valid() {
        let x = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]];
        let c = kmeans(x.view(), 3, &mut rng(5), KMeansConfig::default()).unwrap();
        assert_eq!(c.sizes.iter().sum::<usize>(), 4);
        assert_eq!(c.sse, 0.0);
    }

    #[test]
    fn lloyd_sse_is_monotone() {
        let mut r = rng(11);
        let x = Array2::from_shape_fn((60, 3), |_| r.random::<f64>() * 10.0);
        for seed in 0..20 {
            let (_, trace) = kmeans_single_run_trace(x.view(), 6, 300, &mut rng(seed)).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{trace:?}");
            }
        }
    }

    #[test]
    fn closest_member_rules() {
        let x = array![[0.0], [2.0], [1.0], [-1.0], [5.0]];
        assert_eq!(closest_to_centroid(&[3], x.view(), array![100.0].view()).unwrap(), 3);
        // distances 2, 1, 1 from centroid 0 for members 1, 2, 3 → tie on 2 and 3.
        assert_eq!(closest_to_centroid(&[1, 3, 2], x.view(), array![0.0].view()).unwrap(), 2);
        assert!(closest_to_centroid(&[], x.view(), array![0.0].view()).is_err());
    }
}
