//! Command-line front end: JSON experiment configs, the dataset registry and
//! the `run`, `bench`, `viz` and `stats` subcommands.
//!
//! Output layout under the output directory:
//!
//! ```text
//! runs/<dataset>/<strategy>/run_<r>.json   one RunResult per file
//! <dataset>/curves.csv                     per-run curves of one dataset
//! <dataset>/summary.json                   ResultsTable of one dataset
//! curves.csv, summary.json                 bench-wide versions
//! stats.json, dunn_<metric>.csv            stats subcommand
//! viz/<dataset>_<strategy>_run<r>_step<s>.csv
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::KMeansConfig;
use crate::data::{load_dataset, ColumnSpec, Dataset, Schema};
use crate::error::{Error, Result};
use crate::evaluation::{
    append_curves_csv, compute_auc, evaluate_strategy, normalize_and_rank, pca_csv, pca_selection, run_setup,
    BudgetBounds, ExperimentConfig, Metric, RankTable, ResultsTable, RunResult, CURVES_CSV_HEADER,
};
use crate::regression::{DEFAULT_COMMITTEE_SIZE, DEFAULT_SIGMA};
use crate::stats::{compare_groups, ComparisonReport};
use crate::strategies::{StrategyKind, StrategySpec, DEFAULT_GAMMA};

/// Observation unit fed to Dunn's test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// One normalized AUC per dataset (from the mean curves).
    #[default]
    Dataset,
    /// One normalized AUC per (dataset, run), each run normalized by the BL
    /// curve of the same run.
    Run,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    /// Resolved against the config file's directory when relative.
    pub path: PathBuf,
    pub target: String,
    #[serde(default)]
    pub categorical: Vec<String>,
}

impl DatasetEntry {
    /// Schema built from the file's header: every column numeric except the
    /// ones listed as categorical.
    pub fn schema(&self) -> Result<Schema> {
        let text = fs::read_to_string(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let header = text.lines().next().ok_or_else(|| Error::EmptyFile { path: self.path.clone() })?;
        let columns: Vec<ColumnSpec> = header
            .split(',')
            .map(|c| {
                let c = c.trim();
                if self.categorical.iter().any(|k| k == c) {
                    ColumnSpec::categorical(c)
                } else {
                    ColumnSpec::numeric(c)
                }
            })
            .collect();
        for cat in &self.categorical {
            if !columns.iter().any(|c| &c.name == cat) {
                return Err(Error::Header {
                    path: self.path.clone(),
                    message: format!("categorical column `{cat}` not found"),
                });
            }
        }
        Ok(Schema::new(columns, self.target.clone()))
    }

    pub fn load(&self) -> Result<Dataset> {
        load_dataset(&self.path, &self.schema()?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum StrategyEntry {
    Name(String),
    Detailed {
        kind: String,
        committee_size: Option<usize>,
        gamma: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: Option<DatasetEntry>,
    datasets: Option<Vec<DatasetEntry>>,
    strategies: Vec<StrategyEntry>,
    runs: Option<usize>,
    train_fraction: Option<f64>,
    budget_fraction: Option<f64>,
    budget_bounds: Option<BudgetBounds>,
    sigma: Option<f64>,
    committee_size: Option<usize>,
    gamma: Option<f64>,
    kmeans: Option<KMeansConfig>,
    base_seed: Option<u64>,
    alpha: Option<f64>,
    stats_granularity: Option<Granularity>,
}

/// A fully validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetEntry>,
    pub strategies: Vec<StrategySpec>,
    pub runs: usize,
    pub train_fraction: f64,
    pub budget_fraction: f64,
    pub budget_bounds: BudgetBounds,
    pub sigma: f64,
    pub kmeans: KMeansConfig,
    pub base_seed: u64,
    pub alpha: f64,
    pub stats_granularity: Granularity,
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl BenchConfig {
    /// Parses and validates config text without touching the filesystem.
    /// Relative dataset paths are joined onto `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner().to_string())
        })?;

        let mut datasets = match (raw.dataset, raw.datasets) {
            (Some(_), Some(_)) => return Err(config_error(".", "give either `dataset` or `datasets`, not both")),
            (Some(d), None) => vec![d],
            (None, Some(ds)) => ds,
            (None, None) => return Err(config_error(".", "missing `dataset` or `datasets`")),
        };
        if datasets.is_empty() {
            return Err(config_error("datasets", "at least one dataset is required"));
        }
        for (i, d) in datasets.iter_mut().enumerate() {
            if d.name.is_empty() || d.name.contains(['/', '\\']) {
                return Err(config_error(format!("datasets[{i}].name"), "must be a nonempty plain name"));
            }
            if d.path.is_relative() {
                d.path = base_dir.join(&d.path);
            }
        }
        for i in 0..datasets.len() {
            if datasets[..i].iter().any(|o| o.name == datasets[i].name) {
                return Err(config_error(format!("datasets[{i}].name"), format!("duplicate dataset `{}`", datasets[i].name)));
            }
        }

        let committee_size = raw.committee_size.unwrap_or(DEFAULT_COMMITTEE_SIZE);
        let gamma = raw.gamma.unwrap_or(DEFAULT_GAMMA);
        if raw.strategies.is_empty() {
            return Err(config_error("strategies", "at least one strategy is required"));
        }
        let mut strategies = Vec::with_capacity(raw.strategies.len());
        for (i, entry) in raw.strategies.iter().enumerate() {
            let (name, p, g) = match entry {
                StrategyEntry::Name(n) => (n.as_str(), committee_size, gamma),
                StrategyEntry::Detailed {
                    kind,
                    committee_size: p,
                    gamma: g,
                } => (kind.as_str(), p.unwrap_or(committee_size), g.unwrap_or(gamma)),
            };
            let kind: StrategyKind = name
                .parse()
                .map_err(|_| config_error(format!("strategies[{i}]"), format!("unknown strategy `{name}`")))?;
            if strategies.iter().any(|s: &StrategySpec| s.kind == kind) {
                return Err(config_error(format!("strategies[{i}]"), format!("duplicate strategy `{kind}`")));
            }
            let spec = StrategySpec {
                kind,
                committee_size: p,
                gamma: g,
            };
            spec.validate()
                .map_err(|e| config_error(format!("strategies[{i}]"), e.to_string()))?;
            strategies.push(spec);
        }

        let config = BenchConfig {
            datasets,
            strategies,
            runs: raw.runs.unwrap_or(100),
            train_fraction: raw.train_fraction.unwrap_or(0.8),
            budget_fraction: raw.budget_fraction.unwrap_or(0.1),
            budget_bounds: raw.budget_bounds.unwrap_or_default(),
            sigma: raw.sigma.unwrap_or(DEFAULT_SIGMA),
            kmeans: raw.kmeans.unwrap_or_default(),
            base_seed: raw.base_seed.unwrap_or(0),
            alpha: raw.alpha.unwrap_or(0.05),
            stats_granularity: raw.stats_granularity.unwrap_or_default(),
        };
        config.check_fields()?;
        Ok(config)
    }

    fn check_fields(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(config_error("runs", "must be at least 1"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(config_error("train_fraction", format!("must lie in (0, 1), got {}", self.train_fraction)));
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return Err(config_error("budget_fraction", format!("must lie in (0, 1], got {}", self.budget_fraction)));
        }
        if self.budget_bounds.min == 0 || self.budget_bounds.min > self.budget_bounds.max {
            return Err(config_error("budget_bounds", "need 1 <= min <= max"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(config_error("sigma", "must be finite and nonnegative"));
        }
        if self.kmeans.restarts == 0 || self.kmeans.max_iter == 0 {
            return Err(config_error("kmeans", "restarts and max_iter must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config_error("alpha", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Reads, parses and validates a config file, including that every
    /// dataset file exists.
    /// Reads and validates a config file. Dataset files are not opened; see
    /// [`BenchConfig::check_files`].
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json_str(&text, base)
    }

    /// Fails with a config error naming the first dataset whose file is missing.
    pub fn check_files(&self) -> Result<()> {
        for d in &self.datasets {
            if !d.path.is_file() {
                return Err(config_error(
                    format!("datasets[{}].path", d.name),
                    format!("dataset file {} does not exist", d.path.display()),
                ));
            }
        }
        Ok(())
    }

    pub fn dataset(&self, name: &str) -> Result<&DatasetEntry> {
        self.datasets
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::invalid(format!("dataset `{name}` is not declared in the config")))
    }

    pub fn experiment(&self, dataset: &str) -> ExperimentConfig {
        ExperimentConfig {
            dataset: dataset.to_string(),
            strategies: self.strategies.clone(),
            runs: self.runs,
            train_fraction: self.train_fraction,
            budget_fraction: self.budget_fraction,
            budget_bounds: self.budget_bounds,
            sigma: self.sigma,
            base_seed: self.base_seed,
            kmeans: self.kmeans,
        }
    }

    /// Keeps only the named datasets; every name must be declared.
    pub fn retain_datasets(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            self.dataset(n)?;
        }
        if !names.is_empty() {
            self.datasets.retain(|d| names.contains(&d.name));
        }
        Ok(())
    }

    /// Keeps only the named strategies; every name must be declared.
    pub fn retain_strategies(&mut self, names: &[String]) -> Result<()> {
        let mut kinds = Vec::new();
        for n in names {
            let kind: StrategyKind = n.parse()?;
            if !self.strategies.iter().any(|s| s.kind == kind) {
                return Err(Error::invalid(format!("strategy `{kind}` is not declared in the config")));
            }
            kinds.push(kind);
        }
        if !kinds.is_empty() {
            self.strategies.retain(|s| kinds.contains(&s.kind));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "alr", version, about = "Active learning for regression: strategies and benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured strategy on one dataset.
    Run(RunArgs),
    /// Sweep all datasets and strategies, resuming from per-run files.
    Bench(RunArgs),
    /// Export a PCA view of the samples a strategy selected.
    Viz(VizArgs),
    /// Dunn's test with FDR adjustment over a completed bench.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(short, long, env = "ALR_OUTPUT_DIR", default_value = "alr-output")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Override the config's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(short, long)]
    pub jobs: Option<usize>,
    /// Restrict to these datasets (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
    /// Restrict to these strategies (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct VizArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub strategy: String,
    #[arg(long, default_value_t = 0)]
    pub run: usize,
    /// Number of queried samples to flag (default: the whole budget).
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Override the config's observation granularity.
    #[arg(long, value_enum)]
    pub granularity: Option<Granularity>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict to these datasets (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
}

/// Loads the config and applies command-line overrides and filters.
pub fn prepare_config(args: &RunArgs) -> Result<BenchConfig> {
    let mut config = BenchConfig::from_file(&args.common.config)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    config.retain_datasets(&args.datasets)?;
    config.retain_strategies(&args.strategies)?;
    config.check_files()?;
    Ok(config)
}

pub fn run_file(out: &Path, dataset: &str, strategy: StrategyKind, run: usize) -> PathBuf {
    out.join("runs").join(dataset).join(strategy.name()).join(format!("run_{run}.json"))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary file so an interrupted write never leaves a
/// truncated result behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_run(path: &Path) -> Result<Option<RunResult>> {
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match serde_json::from_str(&text) {
        Ok(r) => Ok(Some(r)),
        Err(e) => {
            log::warn!("ignoring unreadable result {}: {e}", path.display());
            Ok(None)
        }
    }
}

fn with_threads<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(work)),
        None => Ok(work()),
    }
}

/// Evaluates (or reloads) every run of one dataset, writing a result file
/// per (strategy, run). Returns results ordered by run, then strategy.
pub fn execute_dataset(config: &BenchConfig, entry: &DatasetEntry, dataset: &Dataset, out: &Path) -> Result<Vec<RunResult>> {
    let experiment = config.experiment(&entry.name);
    experiment.validate()?;
    let done = AtomicUsize::new(0);
    let per_run: Vec<Vec<RunResult>> = (0..config.runs)
        .into_par_iter()
        .map(|r| -> Result<Vec<RunResult>> {
            let mut setup = None;
            let mut results = Vec::with_capacity(config.strategies.len());
            for spec in &config.strategies {
                let path = run_file(out, &entry.name, spec.kind, r);
                let result = match read_run(&path)? {
                    Some(found) if found.seed == experiment.run_seed(r) => found,
                    _ => {
                        if setup.is_none() {
                            setup = Some(run_setup(&experiment, dataset, r)?);
                        }
                        let fresh = evaluate_strategy(&experiment, dataset, setup.as_ref().expect("set"), r, spec)?;
                        write_atomic(&path, &to_json(&fresh)?)?;
                        fresh
                    }
                };
                results.push(result);
            }
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n.is_multiple_of(10) || n == config.runs {
                log::info!("{}: {n}/{} runs", entry.name, config.runs);
            }
            Ok(results)
        })
        .collect::<Result<_>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

/// Everything a run or bench produced for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetOutcome {
    pub name: String,
    pub dataset: Dataset,
    pub runs: Vec<RunResult>,
    pub table: ResultsTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub datasets: Vec<ResultsTable>,
    /// Cross-dataset rank tables, one per metric; present when BL ran.
    pub rank_tables: Option<Vec<RankTable>>,
}

fn cross_dataset_tables(tables: &[ResultsTable]) -> Result<Option<Vec<RankTable>>> {
    let Some(first) = tables.first() else {
        return Ok(None);
    };
    if !first.strategies.contains(&StrategyKind::Baseline) {
        return Ok(None);
    }
    let names: Vec<String> = tables.iter().map(|t| t.dataset.clone()).collect();
    Metric::ALL
        .iter()
        .enumerate()
        .map(|(m, &metric)| {
            let auc = tables.iter().map(|t| t.auc[m].clone()).collect();
            normalize_and_rank(metric, names.clone(), first.strategies.clone(), auc)
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Runs (or resumes) every dataset of `config` and writes per-dataset and
/// bench-wide curves and summaries.
pub fn execute_bench(config: &BenchConfig, out: &Path, jobs: Option<usize>) -> Result<Vec<DatasetOutcome>> {
    create_dir(out)?;
    let mut outcomes = Vec::with_capacity(config.datasets.len());
    for entry in &config.datasets {
        log::info!("loading {} from {}", entry.name, entry.path.display());
        let dataset = entry.load()?;
        let runs = with_threads(jobs, || execute_dataset(config, entry, &dataset, out))??;
        let table = ResultsTable::from_runs(&config.experiment(&entry.name), &dataset, &runs)?;
        let dir = out.join(&entry.name);
        let mut csv = String::from(CURVES_CSV_HEADER);
        csv.push('\n');
        append_curves_csv(&mut csv, &entry.name, &runs);
        write_atomic(&dir.join("curves.csv"), csv.as_bytes())?;
        write_atomic(&dir.join("summary.json"), &to_json(&table)?)?;
        outcomes.push(DatasetOutcome {
            name: entry.name.clone(),
            dataset,
            runs,
            table,
        });
    }

    let mut csv = String::from(CURVES_CSV_HEADER);
    csv.push('\n');
    for o in &outcomes {
        append_curves_csv(&mut csv, &o.name, &o.runs);
    }
    write_atomic(&out.join("curves.csv"), csv.as_bytes())?;
    let tables: Vec<ResultsTable> = outcomes.iter().map(|o| o.table.clone()).collect();
    let summary = BenchSummary {
        rank_tables: cross_dataset_tables(&tables)?,
        datasets: tables,
    };
    write_atomic(&out.join("summary.json"), &to_json(&summary)?)?;
    Ok(outcomes)
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = prepare_config(args)?;
    if config.datasets.len() != 1 {
        return Err(Error::invalid(format!(
            "`run` needs exactly one dataset, the config selects {}; use --datasets or `bench`",
            config.datasets.len()
        )));
    }
    let outcomes = execute_bench(&config, &args.common.out, args.jobs)?;
    print_overview(&outcomes);
    Ok(())
}

pub fn cmd_bench(args: &RunArgs) -> Result<()> {
    let config = prepare_config(args)?;
    let outcomes = execute_bench(&config, &args.common.out, args.jobs)?;
    print_overview(&outcomes);
    Ok(())
}

fn print_overview(outcomes: &[DatasetOutcome]) {
    for o in outcomes {
        println!("{} (d = {}, pool = {}, M = {})", o.name, o.table.n_features, o.table.pool_size, o.table.budget);
        for s in &o.table.strategies {
            let rmse = o.table.auc_of(Metric::RmseT, *s).unwrap_or(f64::NAN);
            match o.table.normalized_auc_of(Metric::RmseT, *s) {
                Some(n) => println!("  {:<8} rmse_t AUC {rmse:>12.4}  normalized {n:.4}", s.name()),
                None => println!("  {:<8} rmse_t AUC {rmse:>12.4}", s.name()),
            }
        }
    }
}

/// Writes the PCA export for one stored run and returns its path.
pub fn execute_viz(config: &BenchConfig, out: &Path, dataset: &str, strategy: StrategyKind, run: usize, step: Option<usize>) -> Result<PathBuf> {
    let entry = config.dataset(dataset)?;
    let path = run_file(out, dataset, strategy, run);
    let result = read_run(&path)?.ok_or(Error::MissingOutput(path))?;
    let data = entry.load()?;
    let setup = run_setup(&config.experiment(dataset), &data, run)?;
    let step = step.unwrap_or(result.query_order.len());
    let points = pca_selection(&data, &setup.pool, &result.query_order, step)?;
    let target = out
        .join("viz")
        .join(format!("{dataset}_{}_run{run}_step{step}.csv", strategy.name()));
    write_atomic(&target, pca_csv(&points).as_bytes())?;
    Ok(target)
}

pub fn cmd_viz(args: &VizArgs) -> Result<()> {
    let mut config = BenchConfig::from_file(&args.common.config)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    config.retain_datasets(std::slice::from_ref(&args.dataset))?;
    config.check_files()?;
    let strategy: StrategyKind = args.strategy.parse()?;
    let path = execute_viz(&config, &args.common.out, &args.dataset, strategy, args.run, args.step)?;
    println!("{}", path.display());
    Ok(())
}

/// Normalized-AUC observations per strategy for one metric, read from the
/// stored per-run results.
pub fn collect_observations(
    config: &BenchConfig,
    out: &Path,
    metric: Metric,
    granularity: Granularity,
) -> Result<BTreeMap<StrategyKind, Vec<f64>>> {
    if !config.strategies.iter().any(|s| s.kind == StrategyKind::Baseline) {
        return Err(Error::invalid("stats need BL among the strategies"));
    }
    let mut groups: BTreeMap<StrategyKind, Vec<f64>> = BTreeMap::new();
    for entry in &config.datasets {
        let mut runs: BTreeMap<StrategyKind, Vec<RunResult>> = BTreeMap::new();
        for spec in &config.strategies {
            let mut list = Vec::with_capacity(config.runs);
            for r in 0..config.runs {
                let path = run_file(out, &entry.name, spec.kind, r);
                let result = read_run(&path)?.ok_or_else(|| Error::MissingOutput(path.clone()))?;
                if result.seed != config.experiment(&entry.name).run_seed(r) {
                    return Err(Error::MissingOutput(path));
                }
                list.push(result);
            }
            runs.insert(spec.kind, list);
        }
        match granularity {
            Granularity::Dataset => {
                let all: Vec<RunResult> = runs.values().flatten().cloned().collect();
                let means = crate::evaluation::aggregate(&all);
                let auc_of = |kind: StrategyKind| -> Result<f64> {
                    let mc = means.iter().find(|m| m.strategy == kind).expect("strategy present");
                    compute_auc(metric.curve(mc))
                };
                let base = auc_of(StrategyKind::Baseline)?;
                for spec in &config.strategies {
                    groups.entry(spec.kind).or_default().push(auc_of(spec.kind)? / base);
                }
            }
            Granularity::Run => {
                for r in 0..config.runs {
                    let base = compute_auc(&metric.run_curve(&runs[&StrategyKind::Baseline][r]))?;
                    for spec in &config.strategies {
                        let auc = compute_auc(&metric.run_curve(&runs[&spec.kind][r]))?;
                        let value = auc / base;
                        if value.is_finite() {
                            groups.entry(spec.kind).or_default().push(value);
                        } else {
                            log::warn!("{} run {r}: non-finite normalized {} AUC skipped", entry.name, metric.name());
                        }
                    }
                }
            }
        }
    }
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    pub granularity: Granularity,
    pub reports: BTreeMap<String, ComparisonReport>,
}

/// Dunn/FDR comparisons for all four metrics; writes `stats.json` and one
/// triangular CSV per metric.
pub fn execute_stats(config: &BenchConfig, out: &Path, granularity: Granularity) -> Result<StatsSummary> {
    let names: Vec<String> = config.strategies.iter().map(|s| s.kind.name().to_string()).collect();
    let mut reports = BTreeMap::new();
    for metric in Metric::ALL {
        let groups = collect_observations(config, out, metric, granularity)?;
        let ordered: Vec<Vec<f64>> = config.strategies.iter().map(|s| groups[&s.kind].clone()).collect();
        let report = compare_groups(&names, &ordered, config.alpha)?;
        write_atomic(&out.join(format!("dunn_{}.csv", metric.name())), report.triangular_csv().as_bytes())?;
        reports.insert(metric.name().to_string(), report);
    }
    let summary = StatsSummary { granularity, reports };
    write_atomic(&out.join("stats.json"), &to_json(&summary)?)?;
    Ok(summary)
}

pub fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let mut config = BenchConfig::from_file(&args.common.config)?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    config.retain_datasets(&args.datasets)?;
    let granularity = args.granularity.unwrap_or(config.stats_granularity);
    let summary = execute_stats(&config, &args.common.out, granularity)?;
    let rmse = &summary.reports["rmse_t"];
    for p in &rmse.pairs {
        if p.row == "BL" || p.col == "BL" {
            println!(
                "rmse_t {:>8} vs {:<8} p_adj = {:.4}{}",
                p.row,
                p.col,
                p.p_adjusted,
                if p.significant { " *" } else { "" }
            );
        }
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Viz(a) => cmd_viz(a),
        Command::Stats(a) => cmd_stats(a),
    }
}
