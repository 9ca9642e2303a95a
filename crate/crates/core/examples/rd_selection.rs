//! Representativeness-diversity selection: cluster into m groups and query
//! from the largest cluster that holds no labeled sample.

use alr::strategies::{rd_initialize, select_rd_detailed, PoolState, RdOption};
use alr::synthetic::{two_blobs, TwoBlobConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> alr::Result<()> {
    let ds = two_blobs(TwoBlobConfig { n: 120, d: 3, ..Default::default() }, 2)?;
    let mut state = PoolState::full(&ds, ChaCha8Rng::seed_from_u64(4))?;
    let d = ds.n_features();
    let init = rd_initialize(&mut state, d)?;
    for &i in &init {
        state.label(i)?;
    }
    println!("initialization (cluster representatives): {init:?}");

    for option in [RdOption::Centroid, RdOption::Qbc, RdOption::Emcm, RdOption::Gs] {
        let mut s = state.clone();
        for _ in 0..3 {
            let m = s.labeled().len() + 1;
            let pick = select_rd_detailed(&mut s, m, option, 4)?;
            let size = pick.cluster.map(|c| pick.clustering.sizes[c]);
            println!("{option:?}: m = {m}, cluster size {size:?}, picked {}", pick.index);
            s.label(pick.index)?;
        }
    }
    Ok(())
}
