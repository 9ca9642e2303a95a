//! k-means++ with restarts on a two-blob problem, plus the sample closest to
//! each centroid.

use alr::clustering::{closest_to_centroid, kmeans, KMeansConfig};
use alr::synthetic::{two_blobs, TwoBlobConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> alr::Result<()> {
    let ds = two_blobs(TwoBlobConfig { n: 60, d: 2, separation: 8.0, ..Default::default() }, 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for k in 1..=4 {
        let c = kmeans(ds.x(), k, &mut rng, KMeansConfig::default())?;
        let reps: Vec<usize> = (0..k)
            .map(|j| closest_to_centroid(&c.members(j), ds.x(), c.centroids.row(j)))
            .collect::<alr::Result<_>>()?;
        println!("k = {k}: sse {:8.3}, sizes {:?}, representatives {reps:?}", c.sse, c.sizes);
    }
    Ok(())
}
