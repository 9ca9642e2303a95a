//! Invariants checked on generated inputs.

mod common;

use alr::clustering::{kmeans, kmeans_single_run_trace, KMeansConfig};
use alr::data::{one_hot_encode, zscore_columns, Dataset, RawDataset, Value};
use alr::evaluation::{compute_budget, BudgetBounds};
use alr::regression::{fit_ridge, stationarity_residual};
use alr::stats::{dunn_pairwise, fdr_bh};
use alr::regression::RidgeModel;
use alr::strategies::{expected_model_change, run_strategy, PoolState, StrategyKind, StrategySpec};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-5.0f64..5.0, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn fit_case() -> impl Strategy<Value = (Array2<f64>, Array1<f64>, f64)> {
    (1usize..12, 1usize..6).prop_flat_map(|(m, d)| {
        (
            matrix(m, d),
            prop::collection::vec(-10.0f64..10.0, m).prop_map(Array1::from),
            prop_oneof![Just(0.01), 1e-4f64..10.0],
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ridge_is_stationary((x, y, sigma) in fit_case()) {
        let model = fit_ridge(x.view(), y.view(), sigma).unwrap();
        let (res, scale) = stationarity_residual(&model, x.view(), y.view());
        prop_assert!(res <= 1e-8 * scale, "residual {res} scale {scale}");
    }

    #[test]
    fn ridge_shrinks_monotonically((x, y, s1) in fit_case(), factor in 1.5f64..100.0) {
        let a = fit_ridge(x.view(), y.view(), s1).unwrap();
        let b = fit_ridge(x.view(), y.view(), s1 * factor).unwrap();
        let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(norm(a.weights()) + 1e-12 >= norm(b.weights()));
    }

    #[test]
    fn ridge_intercept_centering(( x, y, sigma) in fit_case()) {
        let model = fit_ridge(x.view(), y.view(), sigma).unwrap();
        let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
        let ybar = y.mean().unwrap();
        prop_assert!((model.predict_row(mean.view()) - ybar).abs() < 1e-9 * (1.0 + ybar.abs()));
    }

    #[test]
    fn kmeans_assignments_are_nearest(x in (3usize..30, 1usize..4).prop_flat_map(|(n, d)| matrix(n, d)), k in 1usize..4, seed: u64) {
        let k = k.min(x.nrows());
        let c = kmeans(x.view(), k, &mut rng(seed), KMeansConfig { restarts: 3, max_iter: 300 }).unwrap();
        prop_assert_eq!(c.sizes.iter().sum::<usize>(), x.nrows());
        let mut sse = 0.0;
        for (i, row) in x.rows().into_iter().enumerate() {
            let dists: Vec<f64> = (0..k).map(|j| row.iter().zip(c.centroids.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum()).collect();
            let a = c.assignments[i];
            // Nearest centroid, lowest index on ties.
            prop_assert!(dists.iter().enumerate().all(|(j, &dj)| dj > dists[a] || (dj == dists[a] && j >= a)));
            sse += dists[a];
        }
        prop_assert!((sse - c.sse).abs() <= 1e-9 * (1.0 + sse));
    }

    #[test]
    fn lloyd_sse_never_increases(x in (5usize..40, 1usize..4).prop_flat_map(|(n, d)| matrix(n, d)), seed: u64) {
        let (_, trace) = kmeans_single_run_trace(x.view(), 3, 300, &mut rng(seed)).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn kmeans_is_reproducible(x in matrix(25, 2), seed: u64) {
        let a = kmeans(x.view(), 4, &mut rng(seed), KMeansConfig::default()).unwrap();
        let b = kmeans(x.view(), 4, &mut rng(seed), KMeansConfig::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn budget_monotone_and_bounded(a in 20usize..5000, b in 20usize..5000, f in 0.01f64..1.0) {
        let bounds = BudgetBounds::default();
        let (lo, hi) = (a.min(b), a.max(b));
        let m_lo = compute_budget(lo, f, bounds).unwrap();
        let m_hi = compute_budget(hi, f, bounds).unwrap();
        prop_assert!(m_lo <= m_hi);
        prop_assert!((20..=60).contains(&m_lo) && (20..=60).contains(&m_hi));
    }

    #[test]
    fn zscore_columns_are_standardized(x in (2usize..30, 1usize..5).prop_flat_map(|(n, d)| matrix(n, d))) {
        let mut z = x.clone();
        zscore_columns(&mut z);
        let n = z.nrows() as f64;
        for (j, col) in z.columns().into_iter().enumerate() {
            let raw = x.column(j);
            let constant = raw.iter().all(|&v| v == raw[0]);
            if constant {
                prop_assert!(col.iter().all(|&v| v == 0.0));
            } else {
                let mean = col.sum() / n;
                let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                prop_assert!(mean.abs() < 1e-9 && (sd - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_hot_blocks_sum_to_one(levels in prop::collection::vec(0usize..4, 2..30)) {
        let names = ["a", "b", "c", "d"];
        let raw = RawDataset {
            columns: vec![
                alr::data::ColumnSpec::numeric("v"),
                alr::data::ColumnSpec::categorical("cat"),
                alr::data::ColumnSpec::numeric("y"),
            ],
            target: "y".into(),
            rows: levels
                .iter()
                .enumerate()
                .map(|(i, &l)| vec![Value::Numeric(i as f64), Value::Categorical(names[l].into()), Value::Numeric(1.0)])
                .collect(),
        };
        let enc = one_hot_encode(&raw);
        let distinct = { let mut l = levels.clone(); l.sort(); l.dedup(); l.len() };
        prop_assert_eq!(enc.matrix.ncols(), 1 + distinct);
        for row in enc.matrix.rows() {
            prop_assert_eq!(row.iter().skip(1).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn dunn_antisymmetric_and_equivariant(groups in prop::collection::vec(prop::collection::vec(0u8..6, 2..6), 2..5)) {
        let groups: Vec<Vec<f64>> = groups.into_iter().map(|g| g.into_iter().map(f64::from).collect()).collect();
        let r = dunn_pairwise(&groups).unwrap();
        let k = groups.len();
        for i in 0..k {
            for j in 0..k {
                prop_assert!((r.z[i][j] + r.z[j][i]).abs() < 1e-12);
                prop_assert!((r.p[i][j] - r.p[j][i]).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&r.p[i][j]));
            }
        }
        let mut reversed = groups.clone();
        reversed.reverse();
        let rr = dunn_pairwise(&reversed).unwrap();
        for i in 0..k {
            for j in 0..k {
                prop_assert!((rr.p[k - 1 - i][k - 1 - j] - r.p[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fdr_order_invariant_and_monotone(raw in prop::collection::vec(0.0f64..1.0, 1..20), bump in 0.0f64..0.5, which in 0usize..20) {
        let (adj, flags) = fdr_bh(&raw, 0.05).unwrap();
        for (a, f) in adj.iter().zip(&flags) {
            prop_assert_eq!(*f, *a < 0.05);
        }
        let mut rev = raw.clone();
        rev.reverse();
        let (adj_rev, _) = fdr_bh(&rev, 0.05).unwrap();
        let mut back = adj_rev.clone();
        back.reverse();
        prop_assert_eq!(&back, &adj);
        // Adjusted values follow the order of the raw values.
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i] < raw[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
        }
        let w = which % raw.len();
        let mut raised = raw.clone();
        raised[w] = (raised[w] + bump).min(1.0);
        let (adj_up, _) = fdr_bh(&raised, 0.05).unwrap();
        for (a, b) in adj.iter().zip(&adj_up) {
            prop_assert!(b + 1e-15 >= *a);
        }
    }
}

fn small_dataset(seed: u64, n: usize, d: usize) -> Dataset {
    common::random_dataset(&mut rng(seed), n, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn strategies_return_fresh_unique_indices(seed: u64, kind in prop::sample::select(StrategyKind::ALL.to_vec())) {
        let ds = small_dataset(seed, 40, 3);
        let mut state = PoolState::full(&ds, rng(seed)).unwrap();
        let order = run_strategy(&StrategySpec::new(kind), &mut state, 12).unwrap();
        prop_assert_eq!(order.len(), 12);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), 12);
        prop_assert!(order.iter().all(|&i| !state.is_excluded(i)));
    }

    #[test]
    fn exhausting_the_pool_gives_a_permutation(seed: u64, kind in prop::sample::select(StrategyKind::ALL.to_vec())) {
        let ds = small_dataset(seed, 12, 2);
        let mut state = PoolState::full(&ds, rng(seed)).unwrap();
        let selectable = 12;
        if kind == StrategyKind::Eemcm {
            // The outlier filter may shrink the pool; the strategy then
            // either uses every survivor or falls back to the full pool.
            let budget = state.selectable().len();
            let order = run_strategy(&StrategySpec::new(kind), &mut state, budget).unwrap();
            let mut s = order.clone();
            s.sort_unstable();
            prop_assert_eq!(s, state.selectable());
        } else {
            let order = run_strategy(&StrategySpec::new(kind), &mut state, selectable).unwrap();
            let mut s = order.clone();
            s.sort_unstable();
            prop_assert_eq!(s, (0..12).collect::<Vec<_>>());
        }
    }

    #[test]
    fn query_order_is_deterministic(seed: u64, kind in prop::sample::select(StrategyKind::ALL.to_vec())) {
        let ds = small_dataset(seed, 30, 3);
        let a = run_strategy(&StrategySpec::new(kind), &mut PoolState::full(&ds, rng(seed)).unwrap(), 10).unwrap();
        let b = run_strategy(&StrategySpec::new(kind), &mut PoolState::full(&ds, rng(seed)).unwrap(), 10).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn passive_strategies_ignore_labels(seed: u64, kind in prop::sample::select(vec![StrategyKind::Gs, StrategyKind::Rd, StrategyKind::RdGs])) {
        let ds = small_dataset(seed, 35, 3);
        let poisoned = ds.with_targets(Array1::from_shape_fn(35, |i| ((i * 7919) % 13) as f64 * 1e3)).unwrap();
        let a = run_strategy(&StrategySpec::new(kind), &mut PoolState::full(&ds, rng(seed)).unwrap(), 12).unwrap();
        let b = run_strategy(&StrategySpec::new(kind), &mut PoolState::full(&poisoned, rng(seed)).unwrap(), 12).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn emcm_scores_scale_with_the_feature_norm(
        rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..20),
        offsets in prop::collection::vec(-1.0f64..1.0, 2..6),
        c in 0.1f64..10.0,
    ) {
        // Committee members that differ from the master only in the
        // intercept have an x-independent prediction gap, so g(c x) = c g(x).
        let master = RidgeModel::new(vec![0.4, -1.0, 2.0], 0.3, 0.01);
        let committee: Vec<RidgeModel> = offsets.iter().map(|o| RidgeModel::new(vec![0.4, -1.0, 2.0], 0.3 + o, 0.01)).collect();
        let base: Vec<f64> = rows.iter().map(|r| expected_model_change(&master, &committee, Array1::from(r.clone()).view())).collect();
        let scaled: Vec<f64> = rows
            .iter()
            .map(|r| expected_model_change(&master, &committee, Array1::from_iter(r.iter().map(|v| v * c)).view()))
            .collect();
        for (b, s) in base.iter().zip(&scaled) {
            prop_assert!((s - c * b).abs() <= 1e-9 * (1.0 + c * b));
        }
        let idx: Vec<usize> = (0..rows.len()).collect();
        let arg = |v: &[f64]| common::scan_argmax(&idx, v);
        // Argmax is unchanged unless two scores were within rounding of each other.
        let mut sorted = base.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted.len() < 2 || sorted[0] - sorted[1] > 1e-9 * (1.0 + sorted[0]) {
            prop_assert_eq!(arg(&base), arg(&scaled));
        }
    }
}
