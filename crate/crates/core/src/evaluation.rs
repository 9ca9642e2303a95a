//! Repeated-split evaluation harness.
//!
//! Each run draws one train/test split that every strategy shares, so
//! strategies are compared on identical pools. After every query from
//! `m = d` to `m = M` a ridge model is refit on the labeled samples and two
//! metric pairs are recorded:
//!
//! * transductive: RMSE and CC over the whole pool, where labeled samples
//!   contribute their true label and the rest the model prediction;
//! * inductive: RMSE and CC of the model on the held-out split.
//!
//! Mean curves are summarized by their trapezoidal area (AUC), normalized by
//! the random baseline and ranked across strategies.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::KMeansConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::{fit_ridge, RidgeModel, DEFAULT_SIGMA};
use crate::stats::average_ranks;
use crate::strategies::{run_strategy, PoolState, StrategyKind, StrategySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for BudgetBounds {
    fn default() -> Self {
        Self { min: 20, max: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub strategies: Vec<StrategySpec>,
    pub runs: usize,
    pub train_fraction: f64,
    pub budget_fraction: f64,
    pub budget_bounds: BudgetBounds,
    pub sigma: f64,
    pub base_seed: u64,
    pub kmeans: KMeansConfig,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<String>, strategies: Vec<StrategySpec>) -> Self {
        Self {
            dataset: dataset.into(),
            strategies,
            runs: 100,
            train_fraction: 0.8,
            budget_fraction: 0.1,
            budget_bounds: BudgetBounds::default(),
            sigma: DEFAULT_SIGMA,
            base_seed: 0,
            kmeans: KMeansConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::invalid("no strategies configured"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction must lie in (0, 1)"));
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return Err(Error::invalid("budget_fraction must lie in (0, 1]"));
        }
        if self.budget_bounds.min > self.budget_bounds.max {
            return Err(Error::invalid("budget_bounds.min exceeds budget_bounds.max"));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::invalid("sigma must be nonnegative"));
        }
        for s in &self.strategies {
            s.validate()?;
        }
        Ok(())
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

/// Random `floor(fraction * n)` training pool and the complementary test
/// set, both ascending.
pub fn split_pool<R: Rng + ?Sized>(n: usize, train_fraction: f64, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 5 {
        return Err(Error::invalid(format!("need at least 5 samples to split, got {n}")));
    }
    let train_size = (train_fraction * n as f64).floor() as usize;
    if train_size == 0 || train_size >= n {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} leaves an empty train or test set"
        )));
    }
    let mut train: Vec<usize> = rand::seq::index::sample(rng, n, train_size).into_vec();
    train.sort_unstable();
    let mut in_train = vec![false; n];
    for &i in &train {
        in_train[i] = true;
    }
    let test = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((train, test))
}

/// `clamp(round(fraction * pool_size), min, max)`.
pub fn compute_budget(pool_size: usize, budget_fraction: f64, bounds: BudgetBounds) -> Result<usize> {
    if pool_size < bounds.min {
        return Err(Error::invalid(format!(
            "pool of {pool_size} samples is smaller than the minimum budget {}",
            bounds.min
        )));
    }
    let raw = (budget_fraction * pool_size as f64).round() as usize;
    Ok(raw.clamp(bounds.min, bounds.max))
}

/// RMSE and correlation coefficient. `cc` is `None` when either vector is
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub cc: Option<f64>,
}

pub fn rmse_cc(truth: &[f64], predicted: &[f64]) -> Metrics {
    assert_eq!(truth.len(), predicted.len());
    let n = truth.len() as f64;
    let rmse = (truth
        .iter()
        .zip(predicted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
        .sqrt();
    let mean_t = truth.iter().sum::<f64>() / n;
    let mean_p = predicted.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in truth.iter().zip(predicted) {
        let (da, db) = (a - mean_t, b - mean_p);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let cc = if sxx > 0.0 && syy > 0.0 {
        Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
    } else {
        None
    };
    Metrics { rmse, cc }
}

/// Metrics between `truth` and the composite vector that keeps the true
/// value where `labeled` is set and the prediction elsewhere.
pub fn composite_metrics(truth: &[f64], predicted: &[f64], labeled: &[bool]) -> Metrics {
    let composite: Vec<f64> = truth
        .iter()
        .zip(predicted)
        .zip(labeled)
        .map(|((&t, &p), &l)| if l { t } else { p })
        .collect();
    rmse_cc(truth, &composite)
}

pub fn transductive_metrics(dataset: &Dataset, pool: &[usize], labeled: &[usize], model: &RidgeModel) -> Result<Metrics> {
    if labeled.is_empty() {
        return Err(Error::invalid("transductive metrics need a labeled sample"));
    }
    let mut is_labeled = vec![false; dataset.n_samples()];
    for &l in labeled {
        is_labeled[l] = true;
    }
    let mut in_pool = vec![false; dataset.n_samples()];
    for &p in pool {
        in_pool[p] = true;
    }
    if labeled.iter().any(|&l| !in_pool[l]) {
        return Err(Error::invalid("labeled samples must belong to the pool"));
    }
    let y = dataset.y();
    let truth: Vec<f64> = pool.iter().map(|&i| y[i]).collect();
    let predicted: Vec<f64> = pool.iter().map(|&i| model.predict_row(dataset.row(i))).collect();
    let mask: Vec<bool> = pool.iter().map(|&i| is_labeled[i]).collect();
    Ok(composite_metrics(&truth, &predicted, &mask))
}

pub fn inductive_metrics(dataset: &Dataset, test: &[usize], model: &RidgeModel) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::invalid("inductive metrics need a nonempty test set"));
    }
    let y = dataset.y();
    let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let predicted: Vec<f64> = test.iter().map(|&i| model.predict_row(dataset.row(i))).collect();
    Ok(rmse_cc(&truth, &predicted))
}

/// Curves of one strategy in one run. Entry `i` of each curve belongs to
/// `m = first_m + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub strategy: StrategyKind,
    pub run: usize,
    pub seed: u64,
    pub first_m: usize,
    pub query_order: Vec<usize>,
    pub transductive: Vec<Metrics>,
    pub inductive: Vec<Metrics>,
}

impl RunResult {
    pub fn last_m(&self) -> usize {
        self.first_m + self.transductive.len() - 1
    }
}

/// Metric curves for a query order, from `m = first_m` to the full order.
pub fn learning_curves(
    dataset: &Dataset,
    pool: &[usize],
    test: &[usize],
    order: &[usize],
    first_m: usize,
    sigma: f64,
) -> Result<(Vec<Metrics>, Vec<Metrics>)> {
    if first_m == 0 || first_m > order.len() {
        return Err(Error::invalid("first_m must lie in 1..=order length"));
    }
    let mut trans = Vec::with_capacity(order.len() - first_m + 1);
    let mut ind = Vec::with_capacity(order.len() - first_m + 1);
    for m in first_m..=order.len() {
        let labeled = &order[..m];
        let x = dataset.x().select(Axis(0), labeled);
        let y = dataset.y().select(Axis(0), labeled);
        let model = fit_ridge(x.view(), y.view(), sigma)?;
        trans.push(transductive_metrics(dataset, pool, labeled, &model)?);
        if !test.is_empty() {
            ind.push(inductive_metrics(dataset, test, &model)?);
        }
    }
    Ok((trans, ind))
}

/// Train pool, test set and budget of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub seed: u64,
    pub pool: Vec<usize>,
    pub test: Vec<usize>,
    pub budget: usize,
}

pub fn run_setup(config: &ExperimentConfig, dataset: &Dataset, run: usize) -> Result<RunSetup> {
    let seed = config.run_seed(run);
    let mut split_rng = ChaCha8Rng::seed_from_u64(seed);
    let (pool, test) = split_pool(dataset.n_samples(), config.train_fraction, &mut split_rng)?;
    let budget = compute_budget(pool.len(), config.budget_fraction, config.budget_bounds)?;
    Ok(RunSetup {
        seed,
        pool,
        test,
        budget,
    })
}

/// Selection rng for a run; identical for every strategy of the run.
pub fn strategy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs one strategy on the run's shared split.
pub fn evaluate_strategy(config: &ExperimentConfig, dataset: &Dataset, setup: &RunSetup, run: usize, spec: &StrategySpec) -> Result<RunResult> {
    let d = dataset.n_features();
    let mut state = PoolState::new(dataset, setup.pool.clone(), strategy_rng(setup.seed))?
        .with_sigma(config.sigma)
        .with_kmeans(config.kmeans);
    let order = run_strategy(spec, &mut state, setup.budget)?;
    let (transductive, inductive) = learning_curves(dataset, &setup.pool, &setup.test, &order, d, config.sigma)?;
    Ok(RunResult {
        strategy: spec.kind,
        run,
        seed: setup.seed,
        first_m: d,
        query_order: order,
        transductive,
        inductive,
    })
}

/// All configured strategies on the split of run `run`, in config order.
pub fn evaluate_run(config: &ExperimentConfig, dataset: &Dataset, run: usize) -> Result<Vec<RunResult>> {
    let setup = run_setup(config, dataset, run)?;
    config
        .strategies
        .iter()
        .map(|spec| evaluate_strategy(config, dataset, &setup, run, spec))
        .collect()
}

/// Mean curves of one strategy over runs. CC means skip undefined entries;
/// the skipped count is reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurves {
    pub strategy: StrategyKind,
    pub first_m: usize,
    pub runs: usize,
    pub rmse_t: Vec<f64>,
    pub cc_t: Vec<f64>,
    pub rmse_i: Vec<f64>,
    pub cc_i: Vec<f64>,
    pub cc_t_undefined: usize,
    pub cc_i_undefined: usize,
}

fn mean_curve(curves: &[&[Metrics]]) -> (Vec<f64>, Vec<f64>, usize) {
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    let mut rmse = vec![0.0; len];
    let mut cc = vec![0.0; len];
    let mut cc_count = vec![0usize; len];
    let mut undefined = 0;
    for curve in curves {
        for (i, m) in curve[..len].iter().enumerate() {
            rmse[i] += m.rmse;
            match m.cc {
                Some(v) => {
                    cc[i] += v;
                    cc_count[i] += 1;
                }
                None => undefined += 1,
            }
        }
    }
    let n = curves.len() as f64;
    rmse.iter_mut().for_each(|v| *v /= n);
    for (v, c) in cc.iter_mut().zip(&cc_count) {
        *v = if *c > 0 { *v / *c as f64 } else { f64::NAN };
    }
    (rmse, cc, undefined)
}

/// Mean curves for each strategy present in `results`, in order of first
/// appearance. Runs are summed in run-index order.
pub fn aggregate(results: &[RunResult]) -> Vec<MeanCurves> {
    let mut kinds: Vec<StrategyKind> = Vec::new();
    for r in results {
        if !kinds.contains(&r.strategy) {
            kinds.push(r.strategy);
        }
    }
    kinds
        .into_iter()
        .map(|kind| {
            let mut runs: Vec<&RunResult> = results.iter().filter(|r| r.strategy == kind).collect();
            runs.sort_by_key(|r| r.run);
            let t: Vec<&[Metrics]> = runs.iter().map(|r| r.transductive.as_slice()).collect();
            let i: Vec<&[Metrics]> = runs.iter().map(|r| r.inductive.as_slice()).collect();
            let (rmse_t, cc_t, cc_t_undefined) = mean_curve(&t);
            let (rmse_i, cc_i, cc_i_undefined) = mean_curve(&i);
            MeanCurves {
                strategy: kind,
                first_m: runs[0].first_m,
                runs: runs.len(),
                rmse_t,
                cc_t,
                rmse_i,
                cc_i,
                cc_t_undefined,
                cc_i_undefined,
            }
        })
        .collect()
}

/// Composite trapezoid over unit-spaced points.
pub fn compute_auc(curve: &[f64]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::invalid("AUC needs a curve with at least two points"));
    }
    Ok(curve.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    RmseT,
    CcT,
    RmseI,
    CcI,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::RmseT, Metric::CcT, Metric::RmseI, Metric::CcI];

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::CcT | Metric::CcI)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::RmseT => "rmse_t",
            Metric::CcT => "cc_t",
            Metric::RmseI => "rmse_i",
            Metric::CcI => "cc_i",
        }
    }

    pub fn curve(self, mean: &MeanCurves) -> &[f64] {
        match self {
            Metric::RmseT => &mean.rmse_t,
            Metric::CcT => &mean.cc_t,
            Metric::RmseI => &mean.rmse_i,
            Metric::CcI => &mean.cc_i,
        }
    }

    pub fn run_curve(self, run: &RunResult) -> Vec<f64> {
        match self {
            Metric::RmseT => run.transductive.iter().map(|m| m.rmse).collect(),
            Metric::CcT => run.transductive.iter().map(|m| m.cc.unwrap_or(f64::NAN)).collect(),
            Metric::RmseI => run.inductive.iter().map(|m| m.rmse).collect(),
            Metric::CcI => run.inductive.iter().map(|m| m.cc.unwrap_or(f64::NAN)).collect(),
        }
    }
}

/// Ranks within each dataset row (1 = best) with average ranks on ties,
/// plus AUCs normalized by the baseline column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub metric: Metric,
    pub datasets: Vec<String>,
    pub strategies: Vec<StrategyKind>,
    pub auc: Vec<Vec<f64>>,
    pub normalized_auc: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<f64>>,
    /// Mean rank of each strategy over datasets.
    pub mean_ranks: Vec<f64>,
    /// Competition ranking (1, 2, 2, 4, ...) of `mean_ranks`.
    pub overall: Vec<usize>,
}

fn rank_row(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let keyed: Vec<f64> = values
        .iter()
        .map(|&v| {
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if higher_is_better && v.is_finite() {
                -v
            } else {
                v
            }
        })
        .collect();
    average_ranks(&keyed)
}

/// Competition ranking of `values` (smaller first); equal values share the
/// best rank of their group.
pub fn competition_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|o| *o < v).count())
        .collect()
}

pub fn normalize_and_rank(
    metric: Metric,
    datasets: Vec<String>,
    strategies: Vec<StrategyKind>,
    auc: Vec<Vec<f64>>,
) -> Result<RankTable> {
    let base = strategies
        .iter()
        .position(|&s| s == StrategyKind::Baseline)
        .ok_or_else(|| Error::invalid("normalization needs the BL strategy"))?;
    if auc.len() != datasets.len() || auc.iter().any(|row| row.len() != strategies.len()) {
        return Err(Error::invalid("AUC table shape does not match datasets x strategies"));
    }
    let mut normalized = Vec::with_capacity(auc.len());
    let mut ranks = Vec::with_capacity(auc.len());
    for (row, name) in auc.iter().zip(&datasets) {
        if row[base] == 0.0 {
            return Err(Error::invalid(format!("BL AUC is zero on dataset `{name}`")));
        }
        normalized.push(row.iter().map(|v| v / row[base]).collect::<Vec<_>>());
        ranks.push(rank_row(row, metric.higher_is_better()));
    }
    let k = strategies.len();
    let mean_ranks: Vec<f64> = (0..k)
        .map(|s| ranks.iter().map(|r| r[s]).sum::<f64>() / ranks.len().max(1) as f64)
        .collect();
    let overall = competition_ranks(&mean_ranks);
    Ok(RankTable {
        metric,
        datasets,
        strategies,
        auc,
        normalized_auc: normalized,
        ranks,
        mean_ranks,
        overall,
    })
}

/// Aggregated output of one dataset experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub dataset: String,
    pub n_features: usize,
    pub pool_size: usize,
    pub budget: usize,
    pub runs: usize,
    pub strategies: Vec<StrategyKind>,
    pub mean_curves: Vec<MeanCurves>,
    /// `auc[metric][strategy]`, indexed like `Metric::ALL` and `strategies`.
    pub auc: Vec<Vec<f64>>,
    /// Present when BL is among the strategies.
    pub rank_tables: Option<Vec<RankTable>>,
}

impl ResultsTable {
    pub fn from_runs(config: &ExperimentConfig, dataset: &Dataset, results: &[RunResult]) -> Result<Self> {
        let mean_curves = aggregate(results);
        let strategies: Vec<StrategyKind> = mean_curves.iter().map(|m| m.strategy).collect();
        let setup = run_setup(config, dataset, 0)?;
        let mut auc = Vec::new();
        for metric in Metric::ALL {
            let row = mean_curves
                .iter()
                .map(|mc| {
                    let curve = metric.curve(mc);
                    if curve.len() < 2 {
                        Ok(f64::NAN)
                    } else {
                        compute_auc(curve)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            auc.push(row);
        }
        let rank_tables = if strategies.contains(&StrategyKind::Baseline) {
            Some(
                Metric::ALL
                    .iter()
                    .zip(&auc)
                    .map(|(&metric, row)| normalize_and_rank(metric, vec![config.dataset.clone()], strategies.clone(), vec![row.clone()]))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        Ok(Self {
            dataset: config.dataset.clone(),
            n_features: dataset.n_features(),
            pool_size: setup.pool.len(),
            budget: setup.budget,
            runs: config.runs,
            strategies,
            mean_curves,
            auc,
            rank_tables,
        })
    }

    pub fn auc_of(&self, metric: Metric, strategy: StrategyKind) -> Option<f64> {
        let m = Metric::ALL.iter().position(|&x| x == metric)?;
        let s = self.strategies.iter().position(|&x| x == strategy)?;
        Some(self.auc[m][s])
    }

    pub fn normalized_auc_of(&self, metric: Metric, strategy: StrategyKind) -> Option<f64> {
        let base = self.auc_of(metric, StrategyKind::Baseline)?;
        Some(self.auc_of(metric, strategy)? / base)
    }

    pub fn mean_curve(&self, strategy: StrategyKind) -> Option<&MeanCurves> {
        self.mean_curves.iter().find(|m| m.strategy == strategy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub runs: Vec<RunResult>,
    pub table: ResultsTable,
}

/// Evaluates every run with at most `threads` worker threads (all cores when
/// `None`). Output does not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig, dataset: &Dataset, threads: Option<usize>) -> Result<ExperimentOutput> {
    config.validate()?;
    let work = || -> Result<Vec<Vec<RunResult>>> {
        (0..config.runs)
            .into_par_iter()
            .map(|r| evaluate_run(config, dataset, r))
            .collect()
    };
    let per_run = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let runs: Vec<RunResult> = per_run.into_iter().flatten().collect();
    let table = ResultsTable::from_runs(config, dataset, &runs)?;
    Ok(ExperimentOutput { runs, table })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const CURVES_CSV_HEADER: &str = "dataset,strategy,run,m,rmse_t,cc_t,rmse_i,cc_i";

/// Per-run curves as CSV rows (undefined CC left empty).
pub fn curves_csv(dataset: &str, results: &[RunResult]) -> String {
    let mut out = String::from(CURVES_CSV_HEADER);
    out.push('\n');
    append_curves_csv(&mut out, dataset, results);
    out
}

pub fn append_curves_csv(out: &mut String, dataset: &str, results: &[RunResult]) {
    for r in results {
        for (i, t) in r.transductive.iter().enumerate() {
            let ind = r.inductive.get(i);
            let _ = writeln!(
                out,
                "{dataset},{},{},{},{},{},{},{}",
                r.strategy,
                r.run,
                r.first_m + i,
                t.rmse,
                fmt_opt(t.cc),
                ind.map(|m| m.rmse.to_string()).unwrap_or_default(),
                fmt_opt(ind.and_then(|m| m.cc)),
            );
        }
    }
}

/// Projection of the rows of `x` onto the two leading principal components
/// of its sample covariance. Each component is oriented so that its
/// largest-magnitude loading is positive.
pub fn project_pca2(x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, d) = x.dim();
    if d < 2 || n < 3 {
        return Err(Error::invalid(format!("PCA needs d >= 2 and N >= 3, got N = {n}, d = {d}")));
    }
    let mean = x.mean_axis(Axis(0)).expect("n > 0");
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / (n - 1) as f64;
    let cov = DMatrix::from_fn(d, d, |i, j| cov[[i, j]]);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(2);
    for &c in &order[..2] {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let mut lead = 0;
        for j in 1..d {
            if v[j].abs() > v[lead].abs() {
                lead = j;
            }
        }
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|e| *e = -*e);
        }
        components.push(v);
    }

    let top = eig.eigenvalues[order[0]].max(0.0);
    let second = eig.eigenvalues[order[1]];
    let degenerate = second <= 1e-12 * top.max(1e-300);
    if degenerate {
        log::warn!("covariance has rank < 2; second principal component set to zero");
    }

    let mut out = Array2::zeros((n, 2));
    for (i, row) in centered.rows().into_iter().enumerate() {
        out[[i, 0]] = row.iter().zip(&components[0]).map(|(a, b)| a * b).sum();
        if !degenerate {
            out[[i, 1]] = row.iter().zip(&components[1]).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// One row of the PCA export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaPoint {
    pub index: usize,
    pub pc1: f64,
    pub pc2: f64,
    pub selected: bool,
    /// 1-based position in the query order, when selected.
    pub step: Option<usize>,
}

/// PCA of the pool rows, flagging the first `step` samples of `order`.
pub fn pca_selection(dataset: &Dataset, pool: &[usize], order: &[usize], step: usize) -> Result<Vec<PcaPoint>> {
    if step > order.len() {
        return Err(Error::invalid(format!("step {step} exceeds the {} queried samples", order.len())));
    }
    let x = dataset.x().select(Axis(0), pool);
    let proj = project_pca2(x.view())?;
    Ok(pool
        .iter()
        .enumerate()
        .map(|(row, &index)| {
            let step_of = order[..step].iter().position(|&o| o == index).map(|p| p + 1);
            PcaPoint {
                index,
                pc1: proj[[row, 0]],
                pc2: proj[[row, 1]],
                selected: step_of.is_some(),
                step: step_of,
            }
        })
        .collect())
}

pub fn pca_csv(points: &[PcaPoint]) -> String {
    let mut out = String::from("index,pc1,pc2,selected,step\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.index,
            p.pc1,
            p.pc2,
            u8::from(p.selected),
            p.step.map(|s| s.to_string()).unwrap_or_default()
        );
    }
    out
}
