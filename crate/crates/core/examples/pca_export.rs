//! Project the pool onto two principal components and mark the samples an RD
//! run has queried after a given number of steps.

use alr::evaluation::{pca_csv, pca_selection};
use alr::strategies::{run_strategy, PoolState, StrategyKind, StrategySpec};
use alr::synthetic::{two_blobs, TwoBlobConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> alr::Result<()> {
    let ds = two_blobs(TwoBlobConfig { n: 100, d: 4, ..Default::default() }, 6)?;
    let pool: Vec<usize> = (0..ds.n_samples()).collect();
    let mut state = PoolState::new(&ds, pool.clone(), ChaCha8Rng::seed_from_u64(2))?;
    let order = run_strategy(&StrategySpec::new(StrategyKind::Rd), &mut state, 12)?;

    let points = pca_selection(&ds, &pool, &order, 8)?;
    let csv = pca_csv(&points);
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(&path, &csv).map_err(|e| alr::Error::Io { path: path.into(), source: e })?,
        None => {
            for line in csv.lines().take(6) {
                println!("{line}");
            }
            let picked: Vec<usize> = points.iter().filter(|p| p.selected).map(|p| p.index).collect();
            println!("... selected after 8 steps: {picked:?}");
        }
    }
    Ok(())
}
