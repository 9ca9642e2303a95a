//! Outlier filtering before EEMCM: a planted far-away sample ends up in its
//! own small cluster and is excluded from the pool.

use alr::strategies::{ebmalr_outlier_filter, run_strategy, PoolState, StrategyKind, StrategySpec};
use alr::synthetic::{two_blobs, TwoBlobConfig};
use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> alr::Result<()> {
    let base = two_blobs(TwoBlobConfig { n: 60, d: 2, ..Default::default() }, 9)?;
    let mut x = base.x().to_owned();
    x.row_mut(0).fill(25.0);
    let ds = alr::data::Dataset::from_arrays(x, Array1::from(base.y().to_vec()))?;

    let mut state = PoolState::full(&ds, ChaCha8Rng::seed_from_u64(1))?;
    let filter = ebmalr_outlier_filter(&mut state, 2, 0.05)?;
    println!("kept {} samples, removed {:?}", filter.kept.len(), filter.removed);

    let mut state = PoolState::full(&ds, ChaCha8Rng::seed_from_u64(1))?;
    let order = run_strategy(&StrategySpec::new(StrategyKind::Eemcm), &mut state, 15)?;
    println!("EEMCM query order {order:?}");
    println!("outlier queried: {}", order.contains(&0));
    Ok(())
}
