//! Sample-selection strategies for pool-based sequential active learning.
//!
//! Every strategy is an initializer (picks the first `d` samples) followed by
//! a one-sample-per-iteration selector:
//!
//! | kind      | initialization          | iteration                          |
//! |-----------|-------------------------|------------------------------------|
//! | `BL`      | random                  | random                             |
//! | `QBC`     | random                  | committee prediction variance      |
//! | `EMCM`    | random                  | expected model change              |
//! | `GS`      | random                  | max-min distance to labeled set    |
//! | `EEMCM`   | outlier filter + k-means| EMCM over the surviving samples    |
//! | `RD`      | k-means (k = d)         | largest labeled-free cluster, centroid-closest member |
//! | `RD-QBC`  | k-means (k = d)         | largest labeled-free cluster, QBC  |
//! | `RD-EMCM` | k-means (k = d)         | largest labeled-free cluster, EMCM |
//! | `RD-GS`   | k-means (k = d)         | largest labeled-free cluster, GS   |
//! | `E1`      | k-means (k = d)         | random                             |
//! | `E2`      | random                  | largest labeled-free cluster, centroid-closest member |
//! | `E3`      | random                  | EMCM                               |
//!
//! All argmax ties resolve to the lowest sample index. Sample indices are
//! always row indices of the underlying [`Dataset`].

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{closest_to_centroid, kmeans, Clustering, KMeansConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::{bootstrap_committee, fit_ridge, RidgeModel, DEFAULT_COMMITTEE_SIZE, DEFAULT_SIGMA};

/// Default outlier threshold fraction for the EBMALR filter.
pub const DEFAULT_GAMMA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "BL")]
    Baseline,
    #[serde(rename = "QBC")]
    Qbc,
    #[serde(rename = "EMCM")]
    Emcm,
    #[serde(rename = "EEMCM")]
    Eemcm,
    #[serde(rename = "GS")]
    Gs,
    #[serde(rename = "RD")]
    Rd,
    #[serde(rename = "RD-QBC")]
    RdQbc,
    #[serde(rename = "RD-EMCM")]
    RdEmcm,
    #[serde(rename = "RD-GS")]
    RdGs,
    #[serde(rename = "E1")]
    E1,
    #[serde(rename = "E2")]
    E2,
    #[serde(rename = "E3")]
    E3,
}

impl StrategyKind {
    /// The nine strategies of the main comparison, in table order.
    pub const BENCHMARK: [StrategyKind; 9] = [
        StrategyKind::Baseline,
        StrategyKind::Qbc,
        StrategyKind::Emcm,
        StrategyKind::Eemcm,
        StrategyKind::Gs,
        StrategyKind::Rd,
        StrategyKind::RdQbc,
        StrategyKind::RdEmcm,
        StrategyKind::RdGs,
    ];

    pub const ALL: [StrategyKind; 12] = [
        StrategyKind::Baseline,
        StrategyKind::Qbc,
        StrategyKind::Emcm,
        StrategyKind::Eemcm,
        StrategyKind::Gs,
        StrategyKind::Rd,
        StrategyKind::RdQbc,
        StrategyKind::RdEmcm,
        StrategyKind::RdGs,
        StrategyKind::E1,
        StrategyKind::E2,
        StrategyKind::E3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Baseline => "BL",
            StrategyKind::Qbc => "QBC",
            StrategyKind::Emcm => "EMCM",
            StrategyKind::Eemcm => "EEMCM",
            StrategyKind::Gs => "GS",
            StrategyKind::Rd => "RD",
            StrategyKind::RdQbc => "RD-QBC",
            StrategyKind::RdEmcm => "RD-EMCM",
            StrategyKind::RdGs => "RD-GS",
            StrategyKind::E1 => "E1",
            StrategyKind::E2 => "E2",
            StrategyKind::E3 => "E3",
        }
    }

    pub fn rd_option(self) -> Option<RdOption> {
        match self {
            StrategyKind::Rd | StrategyKind::E2 => Some(RdOption::Centroid),
            StrategyKind::RdQbc => Some(RdOption::Qbc),
            StrategyKind::RdEmcm => Some(RdOption::Emcm),
            StrategyKind::RdGs => Some(RdOption::Gs),
            _ => None,
        }
    }

    /// Whether the strategy fits bootstrap committees.
    pub fn uses_committee(self) -> bool {
        matches!(
            self,
            StrategyKind::Qbc
                | StrategyKind::Emcm
                | StrategyKind::Eemcm
                | StrategyKind::RdQbc
                | StrategyKind::RdEmcm
                | StrategyKind::E3
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown strategy `{s}`")))
    }
}

/// How a sample is picked inside the chosen cluster of an RD iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RdOption {
    /// Option 1: the member closest to the cluster centroid.
    Centroid,
    /// Option 2: QBC restricted to the cluster.
    Qbc,
    /// Option 3: EMCM restricted to the cluster.
    Emcm,
    /// Option 4: GS restricted to the cluster.
    Gs,
}

impl RdOption {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(RdOption::Centroid),
            2 => Ok(RdOption::Qbc),
            3 => Ok(RdOption::Emcm),
            4 => Ok(RdOption::Gs),
            _ => Err(Error::invalid(format!("RD option must be 1..=4, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            RdOption::Centroid => 1,
            RdOption::Qbc => 2,
            RdOption::Emcm => 3,
            RdOption::Gs => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub committee_size: usize,
    pub gamma: f64,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            committee_size: DEFAULT_COMMITTEE_SIZE,
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_committee() && self.committee_size < 2 {
            return Err(Error::invalid("committee size must be at least 2"));
        }
        if !(0.0..0.5).contains(&self.gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 0.5), got {}", self.gamma)));
        }
        Ok(())
    }
}

impl From<StrategyKind> for StrategySpec {
    fn from(kind: StrategyKind) -> Self {
        Self::new(kind)
    }
}

/// State of one active-learning run: the candidate pool, the samples queried
/// so far (in query order) and the samples excluded from selection.
#[derive(Debug, Clone)]
pub struct PoolState<'a> {
    dataset: &'a Dataset,
    pool: Vec<usize>,
    in_pool: Vec<bool>,
    is_labeled: Vec<bool>,
    is_excluded: Vec<bool>,
    labeled: Vec<usize>,
    labels: Vec<f64>,
    rng: ChaCha8Rng,
    sigma: f64,
    kmeans: KMeansConfig,
}

impl<'a> PoolState<'a> {
    /// `pool` holds dataset row indices; it is sorted and must be
    /// duplicate-free.
    pub fn new(dataset: &'a Dataset, mut pool: Vec<usize>, rng: ChaCha8Rng) -> Result<Self> {
        let n = dataset.n_samples();
        pool.sort_unstable();
        if pool.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("pool contains duplicate indices"));
        }
        if pool.last().is_some_and(|&i| i >= n) {
            return Err(Error::invalid("pool index out of range"));
        }
        if pool.is_empty() {
            return Err(Error::invalid("pool is empty"));
        }
        let mut in_pool = vec![false; n];
        for &i in &pool {
            in_pool[i] = true;
        }
        Ok(Self {
            dataset,
            pool,
            in_pool,
            is_labeled: vec![false; n],
            is_excluded: vec![false; n],
            labeled: Vec::new(),
            labels: Vec::new(),
            rng,
            sigma: DEFAULT_SIGMA,
            kmeans: KMeansConfig::default(),
        })
    }

    /// Pool made of every sample in the dataset.
    pub fn full(dataset: &'a Dataset, rng: ChaCha8Rng) -> Result<Self> {
        Self::new(dataset, (0..dataset.n_samples()).collect(), rng)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_kmeans(mut self, config: KMeansConfig) -> Self {
        self.kmeans = config;
        self
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn pool(&self) -> &[usize] {
        &self.pool
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        self.kmeans
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn is_labeled(&self, i: usize) -> bool {
        self.is_labeled.get(i).copied().unwrap_or(false)
    }

    pub fn is_excluded(&self, i: usize) -> bool {
        self.is_excluded.get(i).copied().unwrap_or(false)
    }

    pub fn excluded(&self) -> Vec<usize> {
        self.pool.iter().copied().filter(|&i| self.is_excluded[i]).collect()
    }

    /// Pool samples that are not excluded (labeled or not), ascending.
    pub fn selectable(&self) -> Vec<usize> {
        self.pool.iter().copied().filter(|&i| !self.is_excluded[i]).collect()
    }

    /// Pool samples that are neither labeled nor excluded, ascending.
    pub fn unlabeled(&self) -> Vec<usize> {
        self.pool
            .iter()
            .copied()
            .filter(|&i| !self.is_excluded[i] && !self.is_labeled[i])
            .collect()
    }

    /// Queries the oracle (the dataset's ground truth) for sample `i`.
    pub fn label(&mut self, i: usize) -> Result<()> {
        if !self.in_pool.get(i).copied().unwrap_or(false) {
            return Err(Error::invalid(format!("sample {i} is not in the pool")));
        }
        if self.is_labeled[i] {
            return Err(Error::invalid(format!("sample {i} is already labeled")));
        }
        if self.is_excluded[i] {
            return Err(Error::invalid(format!("sample {i} is excluded")));
        }
        self.is_labeled[i] = true;
        self.labeled.push(i);
        self.labels.push(self.dataset.y()[i]);
        Ok(())
    }

    pub fn exclude(&mut self, indices: &[usize]) -> Result<()> {
        for &i in indices {
            if !self.in_pool.get(i).copied().unwrap_or(false) {
                return Err(Error::invalid(format!("sample {i} is not in the pool")));
            }
            if self.is_labeled[i] {
                return Err(Error::invalid(format!("cannot exclude labeled sample {i}")));
            }
        }
        for &i in indices {
            self.is_excluded[i] = true;
        }
        Ok(())
    }

    fn labeled_arrays(&self) -> (Array2<f64>, ndarray::Array1<f64>) {
        let x = self.dataset.x().select(Axis(0), &self.labeled);
        (x, ndarray::Array1::from(self.labels.clone()))
    }

    /// Ridge model fit on all labeled samples.
    pub fn fit_model(&self) -> Result<RidgeModel> {
        if self.labeled.is_empty() {
            return Err(Error::invalid("no labeled samples"));
        }
        let (x, y) = self.labeled_arrays();
        fit_ridge(x.view(), y.view(), self.sigma)
    }

    /// Bootstrap committee over the labeled samples, drawn from the state rng.
    pub fn fit_committee(&mut self, committee_size: usize) -> Result<Vec<RidgeModel>> {
        if self.labeled.is_empty() {
            return Err(Error::invalid("no labeled samples"));
        }
        let (x, y) = self.labeled_arrays();
        bootstrap_committee(x.view(), y.view(), committee_size, self.sigma, &mut self.rng)
    }
}

/// Highest score wins; equal scores go to the lowest index. NaN never wins.
fn argmax_lowest_index(candidates: &[usize], mut score: impl FnMut(usize) -> f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &c in candidates {
        let s = score(c);
        let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
        let better = match best {
            None => true,
            Some((bs, bi)) => s > bs || (s == bs && c < bi),
        };
        if better {
            best = Some((s, c));
        }
    }
    best.map(|(_, i)| i)
}

fn check_candidates(state: &PoolState<'_>, candidates: &[usize]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::invalid("empty candidate set"));
    }
    if state.labeled.is_empty() {
        return Err(Error::invalid("selector needs at least one labeled sample"));
    }
    for &c in candidates {
        if !state.in_pool.get(c).copied().unwrap_or(false) || state.is_labeled[c] || state.is_excluded[c] {
            return Err(Error::invalid(format!("candidate {c} is not an unlabeled pool sample")));
        }
    }
    Ok(())
}

/// Population variance of the committee predictions for one sample.
pub fn committee_variance(committee: &[RidgeModel], row: ArrayView1<'_, f64>) -> f64 {
    let preds: Vec<f64> = committee.iter().map(|m| m.predict_row(row)).collect();
    let p = preds.len() as f64;
    let mean = preds.iter().sum::<f64>() / p;
    preds.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / p
}

/// Expected model change `(1/P) sum_p |y_p - y_hat| * ||x||` for one sample.
pub fn expected_model_change(master: &RidgeModel, committee: &[RidgeModel], row: ArrayView1<'_, f64>) -> f64 {
    let y_hat = master.predict_row(row);
    let norm = row.dot(&row).sqrt();
    committee
        .iter()
        .map(|m| (m.predict_row(row) - y_hat).abs() * norm)
        .sum::<f64>()
        / committee.len() as f64
}

/// Smallest Euclidean distance from `row` to any of `others`.
pub fn min_distance(dataset: &Dataset, row: usize, others: &[usize]) -> f64 {
    let x = dataset.x();
    let r = x.row(row);
    others
        .iter()
        .map(|&o| {
            r.iter()
                .zip(x.row(o).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

pub fn select_qbc_with_committee(dataset: &Dataset, committee: &[RidgeModel], candidates: &[usize]) -> Option<usize> {
    argmax_lowest_index(candidates, |c| committee_variance(committee, dataset.row(c)))
}

pub fn select_emcm_with_models(
    dataset: &Dataset,
    master: &RidgeModel,
    committee: &[RidgeModel],
    candidates: &[usize],
) -> Option<usize> {
    argmax_lowest_index(candidates, |c| expected_model_change(master, committee, dataset.row(c)))
}

/// `d` distinct samples drawn uniformly without replacement from the
/// unlabeled, non-excluded pool.
pub fn init_random(state: &mut PoolState<'_>, d: usize) -> Result<Vec<usize>> {
    let candidates = state.unlabeled();
    if d > candidates.len() {
        return Err(Error::invalid(format!(
            "cannot draw {d} samples from {} candidates",
            candidates.len()
        )));
    }
    Ok(rand::seq::index::sample(&mut state.rng, candidates.len(), d)
        .into_iter()
        .map(|i| candidates[i])
        .collect())
}

/// One representative per non-empty cluster (closest member to the
/// centroid), in cluster order. `rows[i]` is the dataset index of clustering
/// row `i`. Empty clusters, only possible with duplicated points, are topped
/// up with farthest-first picks so that `k` samples are always returned.
fn cluster_representatives(dataset: &Dataset, clustering: &Clustering, rows: &[usize]) -> Result<Vec<usize>> {
    let mut picked = Vec::with_capacity(clustering.k);
    for c in 0..clustering.k {
        let members: Vec<usize> = clustering.members(c).into_iter().map(|p| rows[p]).collect();
        if members.is_empty() {
            continue;
        }
        picked.push(closest_to_centroid(&members, dataset.x(), clustering.centroids.row(c))?);
    }
    while picked.len() < clustering.k {
        let remaining: Vec<usize> = rows.iter().copied().filter(|r| !picked.contains(r)).collect();
        let next = argmax_lowest_index(&remaining, |r| min_distance(dataset, r, &picked))
            .ok_or_else(|| Error::invalid("not enough samples for initialization"))?;
        picked.push(next);
    }
    Ok(picked)
}

/// k-means (k = d) over the non-excluded pool; returns the sample closest to
/// each centroid, ordered by cluster index.
pub fn rd_initialize(state: &mut PoolState<'_>, d: usize) -> Result<Vec<usize>> {
    let rows = state.selectable();
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    if d > rows.len() {
        return Err(Error::invalid(format!("d = {d} exceeds the pool size {}", rows.len())));
    }
    let x = state.dataset.x().select(Axis(0), &rows);
    let config = state.kmeans;
    let clustering = kmeans(x.view(), d, &mut state.rng, config)?;
    cluster_representatives(state.dataset, &clustering, &rows)
}

/// Query-by-committee: the candidate with the largest committee variance.
pub fn select_qbc(state: &mut PoolState<'_>, candidates: &[usize], committee_size: usize) -> Result<usize> {
    check_candidates(state, candidates)?;
    let committee = state.fit_committee(committee_size)?;
    Ok(select_qbc_with_committee(state.dataset, &committee, candidates).expect("nonempty"))
}

/// Expected model change maximization for linear ridge models.
pub fn select_emcm(state: &mut PoolState<'_>, candidates: &[usize], committee_size: usize) -> Result<usize> {
    check_candidates(state, candidates)?;
    let master = state.fit_model()?;
    let committee = state.fit_committee(committee_size)?;
    Ok(select_emcm_with_models(state.dataset, &master, &committee, candidates).expect("nonempty"))
}

/// Greedy sampling: the candidate farthest from its nearest labeled sample.
/// Never reads labels.
pub fn select_gs(state: &PoolState<'_>, candidates: &[usize]) -> Result<usize> {
    check_candidates(state, candidates)?;
    Ok(argmax_lowest_index(candidates, |c| min_distance(state.dataset, c, &state.labeled)).expect("nonempty"))
}

/// Everything computed during one RD iteration.
#[derive(Debug, Clone)]
pub struct RdSelection {
    pub index: usize,
    /// Clustering of `rows` with `k = m`.
    pub clustering: Clustering,
    /// Dataset index of each clustering row.
    pub rows: Vec<usize>,
    /// Largest cluster without a labeled sample; `None` when the fallback
    /// over all unlabeled samples was used.
    pub cluster: Option<usize>,
}

/// One RD iteration: clusters the non-excluded pool into `m` groups, where
/// `m - 1` samples are already labeled, and picks a sample from the largest
/// cluster that holds no labeled sample.
pub fn select_rd(state: &mut PoolState<'_>, m: usize, option: RdOption, committee_size: usize) -> Result<usize> {
    select_rd_detailed(state, m, option, committee_size).map(|s| s.index)
}

pub fn select_rd_detailed(
    state: &mut PoolState<'_>,
    m: usize,
    option: RdOption,
    committee_size: usize,
) -> Result<RdSelection> {
    if state.labeled.is_empty() {
        return Err(Error::invalid("RD iteration needs at least one labeled sample"));
    }
    if m != state.labeled.len() + 1 {
        return Err(Error::invalid(format!(
            "RD iteration m = {m} but {} samples are labeled",
            state.labeled.len()
        )));
    }
    let unlabeled = state.unlabeled();
    if unlabeled.is_empty() {
        return Err(Error::invalid("no unlabeled samples remain"));
    }

    let rows = state.selectable();
    let x = state.dataset.x().select(Axis(0), &rows);
    let config = state.kmeans;
    let clustering = kmeans(x.view(), m, &mut state.rng, config)?;

    let mut holds_label = vec![false; m];
    for (pos, &r) in rows.iter().enumerate() {
        if state.is_labeled[r] {
            holds_label[clustering.assignments[pos]] = true;
        }
    }
    let mut target: Option<usize> = None;
    for c in 0..m {
        if holds_label[c] || clustering.sizes[c] == 0 {
            continue;
        }
        if target.is_none_or(|t| clustering.sizes[c] > clustering.sizes[t]) {
            target = Some(c);
        }
    }

    let index = match target {
        Some(c) => {
            let members: Vec<usize> = clustering.members(c).into_iter().map(|p| rows[p]).collect();
            match option {
                RdOption::Centroid => closest_to_centroid(&members, state.dataset.x(), clustering.centroids.row(c))?,
                RdOption::Qbc => select_qbc(state, &members, committee_size)?,
                RdOption::Emcm => select_emcm(state, &members, committee_size)?,
                RdOption::Gs => select_gs(state, &members)?,
            }
        }
        None => {
            log::debug!("RD fallback: every cluster holds a labeled sample");
            match option {
                RdOption::Centroid => {
                    // Most representative unlabeled sample: nearest to its own centroid.
                    let position: Vec<usize> = {
                        let mut p = vec![usize::MAX; state.dataset.n_samples()];
                        for (pos, &r) in rows.iter().enumerate() {
                            p[r] = pos;
                        }
                        p
                    };
                    let x_all = state.dataset.x();
                    argmax_lowest_index(&unlabeled, |u| {
                        let c = clustering.assignments[position[u]];
                        -x_all
                            .row(u)
                            .iter()
                            .zip(clustering.centroids.row(c).iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                    })
                    .expect("nonempty")
                }
                RdOption::Qbc => select_qbc(state, &unlabeled, committee_size)?,
                RdOption::Emcm => select_emcm(state, &unlabeled, committee_size)?,
                RdOption::Gs => select_gs(state, &unlabeled)?,
            }
        }
    };

    Ok(RdSelection {
        index,
        clustering,
        rows,
        cluster: target,
    })
}

/// Survivors of the outlier filter and the clustering from its last pass.
#[derive(Debug, Clone)]
pub struct OutlierFilter {
    /// Surviving dataset indices, ascending; row `i` of `clustering` is `kept[i]`.
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub clustering: Clustering,
}

/// Iteratively clusters the surviving samples into `d` groups and drops
/// every cluster with at most `max(1, gamma * N)` members, `N` being the
/// original number of selectable samples. Removed samples are excluded from
/// `state`.
pub fn ebmalr_outlier_filter(state: &mut PoolState<'_>, d: usize, gamma: f64) -> Result<OutlierFilter> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 0.5), got {gamma}")));
    }
    if !state.labeled.is_empty() {
        return Err(Error::invalid("outlier filtering must run before any sample is labeled"));
    }
    let mut kept = state.selectable();
    let n = kept.len();
    if d == 0 || d > n {
        return Err(Error::invalid(format!("d = {d} is incompatible with pool size {n}")));
    }
    let threshold = f64::max(1.0, gamma * n as f64);
    let config = state.kmeans;
    let mut removed = Vec::new();

    loop {
        let x = state.dataset.x().select(Axis(0), &kept);
        let clustering = kmeans(x.view(), d, &mut state.rng, config)?;
        let outlier_cluster: Vec<bool> = clustering
            .sizes
            .iter()
            .map(|&s| s > 0 && s as f64 <= threshold)
            .collect();
        if !outlier_cluster.iter().any(|&o| o) {
            state.exclude(&removed)?;
            removed.sort_unstable();
            return Ok(OutlierFilter {
                kept,
                removed,
                clustering,
            });
        }
        let mut survivors = Vec::with_capacity(kept.len());
        for (pos, &r) in kept.iter().enumerate() {
            if outlier_cluster[clustering.assignments[pos]] {
                removed.push(r);
            } else {
                survivors.push(r);
            }
        }
        kept = survivors;
        if kept.len() < d {
            return Err(Error::FilterCollapsed {
                kept: kept.len(),
                needed: d,
            });
        }
    }
}

fn random_pick(state: &mut PoolState<'_>) -> Result<usize> {
    let candidates = state.unlabeled();
    if candidates.is_empty() {
        return Err(Error::invalid("no unlabeled samples remain"));
    }
    let i = state.rng.random_range(0..candidates.len());
    Ok(candidates[i])
}

/// Runs a full selection sequence of `budget` queries from an empty labeled
/// set and returns the query order.
pub fn run_strategy(spec: &StrategySpec, state: &mut PoolState<'_>, budget: usize) -> Result<Vec<usize>> {
    spec.validate()?;
    if !state.labeled.is_empty() {
        return Err(Error::invalid("run_strategy expects a pool with no labeled samples"));
    }
    let d = state.dataset.n_features();
    if budget < d {
        return Err(Error::invalid(format!("budget {budget} is smaller than d = {d}")));
    }
    let available = state.selectable().len();
    if budget > available {
        return Err(Error::invalid(format!("budget {budget} exceeds the {available} selectable samples")));
    }

    let kind = spec.kind;
    let p = spec.committee_size;

    let initial = match kind {
        StrategyKind::Eemcm => {
            // The filter can cascade when gamma * N is large relative to the
            // cluster sizes; EEMCM then runs without outlier removal.
            let mut trial = state.clone();
            match ebmalr_outlier_filter(&mut trial, d, spec.gamma) {
                Ok(filter) if filter.kept.len() >= budget => {
                    *state = trial;
                    cluster_representatives(state.dataset, &filter.clustering, &filter.kept)?
                }
                Ok(_) | Err(Error::FilterCollapsed { .. }) => {
                    log::warn!("outlier filter left fewer than {budget} samples; continuing without it");
                    let pool = state.selectable();
                    let x = state.dataset.x().select(Axis(0), &pool);
                    let clustering = kmeans(x.view(), d, &mut state.rng, state.kmeans)?;
                    cluster_representatives(state.dataset, &clustering, &pool)?
                }
                Err(e) => return Err(e),
            }
        }
        StrategyKind::Rd | StrategyKind::RdQbc | StrategyKind::RdEmcm | StrategyKind::RdGs | StrategyKind::E1 => {
            rd_initialize(state, d)?
        }
        _ => init_random(state, d)?,
    };
    for i in initial {
        state.label(i)?;
    }
    if budget > state.selectable().len() {
        return Err(Error::invalid(format!(
            "budget {budget} exceeds the {} samples left after outlier removal",
            state.selectable().len()
        )));
    }

    while state.labeled.len() < budget {
        let next = match kind {
            StrategyKind::Baseline | StrategyKind::E1 => random_pick(state)?,
            StrategyKind::Qbc => {
                let c = state.unlabeled();
                select_qbc(state, &c, p)?
            }
            StrategyKind::Emcm | StrategyKind::Eemcm | StrategyKind::E3 => {
                let c = state.unlabeled();
                select_emcm(state, &c, p)?
            }
            StrategyKind::Gs => {
                let c = state.unlabeled();
                select_gs(state, &c)?
            }
            StrategyKind::Rd | StrategyKind::RdQbc | StrategyKind::RdEmcm | StrategyKind::RdGs | StrategyKind::E2 => {
                let option = kind.rd_option().expect("RD-family kind");
                let m = state.labeled.len() + 1;
                select_rd(state, m, option, p)?
            }
        };
        state.label(next)?;
    }
    Ok(state.labeled.clone())
}
