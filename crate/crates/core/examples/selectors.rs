//! One step of QBC, EMCM and greedy sampling from the same labeled set.

use alr::strategies::{init_random, select_emcm, select_gs, select_qbc, PoolState};
use alr::synthetic::{two_blobs, TwoBlobConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> alr::Result<()> {
    let ds = two_blobs(TwoBlobConfig { n: 80, d: 4, ..Default::default() }, 5)?;
    let mut state = PoolState::full(&ds, ChaCha8Rng::seed_from_u64(11))?;
    let init = init_random(&mut state, 6)?;
    for &i in &init {
        state.label(i)?;
    }
    println!("initial labels {init:?}");

    let candidates = state.unlabeled();
    let qbc = select_qbc(&mut state.clone(), &candidates, 4)?;
    let emcm = select_emcm(&mut state.clone(), &candidates, 4)?;
    let gs = select_gs(&state, &candidates)?;
    println!("QBC picks {qbc}, EMCM picks {emcm}, GS picks {gs}");

    // A short greedy-sampling run.
    for _ in 0..5 {
        let next = select_gs(&state, &state.unlabeled())?;
        state.label(next)?;
    }
    println!("after 5 GS steps: {:?}", state.labeled());
    Ok(())
}
