//! Fit a ridge model and a bootstrap committee, then inspect their spread.

use alr::regression::{bootstrap_committee, fit_ridge, stationarity_residual, DEFAULT_COMMITTEE_SIZE, DEFAULT_SIGMA};
use alr::synthetic::{two_blobs, TwoBlobConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> alr::Result<()> {
    let ds = two_blobs(TwoBlobConfig { n: 40, d: 3, ..Default::default() }, 1)?;
    let model = fit_ridge(ds.x(), ds.y(), DEFAULT_SIGMA)?;
    println!("weights {:?}", model.weights());
    println!("intercept {:.4}", model.intercept());

    let (residual, scale) = stationarity_residual(&model, ds.x(), ds.y());
    println!("normal-equation residual {:.2e} (scale {scale:.1})", residual);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let committee = bootstrap_committee(ds.x(), ds.y(), DEFAULT_COMMITTEE_SIZE, DEFAULT_SIGMA, &mut rng)?;
    let row = ds.row(0);
    let preds: Vec<f64> = committee.iter().map(|m| m.predict_row(row)).collect();
    println!("committee predictions for sample 0: {preds:.3?}");
    println!("master prediction {:.3}, truth {:.3}", model.predict_row(row), ds.y()[0]);
    Ok(())
}
