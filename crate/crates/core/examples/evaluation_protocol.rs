//! Full protocol on one dataset: paired 80/20 splits, learning curves for
//! several strategies, AUCs normalized by the random baseline, and ranks.
//!
//! cargo run --release --example evaluation_protocol [runs]

use alr::cli::DatasetEntry;
use alr::evaluation::{run_experiment, ExperimentConfig, Metric};
use alr::strategies::{StrategyKind, StrategySpec};

fn main() -> alr::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let entry = DatasetEntry {
        name: "housing".into(),
        path: concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/housing.csv").into(),
        target: "medv".into(),
        categorical: vec![],
    };
    let ds = entry.load()?;
    let specs = StrategyKind::BENCHMARK.iter().map(|&k| StrategySpec::new(k)).collect();
    let mut config = ExperimentConfig::new("housing", specs);
    config.runs = runs;

    let out = run_experiment(&config, &ds, None)?;
    let t = &out.table;
    println!("pool {}, budget {}, {} runs", t.pool_size, t.budget, t.runs);
    println!("{:<8} {:>10} {:>10} {:>10}", "strategy", "AUC", "norm", "RMSE@M");
    for &k in &t.strategies {
        let curve = &t.mean_curve(k).unwrap().rmse_t;
        println!(
            "{:<8} {:>10.3} {:>10.3} {:>10.3}",
            k.name(),
            t.auc_of(Metric::RmseT, k).unwrap(),
            t.normalized_auc_of(Metric::RmseT, k).unwrap(),
            curve.last().unwrap()
        );
    }
    Ok(())
}
