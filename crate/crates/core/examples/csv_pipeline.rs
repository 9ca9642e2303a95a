//! Load a CSV with a categorical column, one-hot encode it and z-score the
//! features.
//!
//! cargo run --example csv_pipeline [path/to/file.csv target categorical...]

use std::path::PathBuf;

use alr::data::{load_csv, one_hot_encode, zscore_normalize, ColumnSpec, Schema};

fn main() -> alr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (path, target, categorical) = match args.as_slice() {
        [path, target, rest @ ..] => (PathBuf::from(path), target.clone(), rest.to_vec()),
        _ => (
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/autompg.csv"),
            "mpg".to_string(),
            vec!["origin".to_string()],
        ),
    };

    let header = std::fs::read_to_string(&path).map_err(|e| alr::Error::Io { path: path.clone(), source: e })?;
    let columns = header
        .lines()
        .next()
        .unwrap_or_default()
        .split(',')
        .map(|c| {
            if categorical.iter().any(|k| k == c) {
                ColumnSpec::categorical(c)
            } else {
                ColumnSpec::numeric(c)
            }
        })
        .collect();
    let schema = Schema::new(columns, target);

    let raw = load_csv(&path, &schema)?;
    println!("{}: {} rows, {} columns", path.display(), raw.n_rows(), raw.n_columns());

    let encoded = one_hot_encode(&raw);
    for block in &encoded.blocks {
        println!("  {} -> {:?}", block.column, block.levels);
    }
    let ds = zscore_normalize(encoded)?;
    println!("normalized: {} samples x {} features", ds.n_samples(), ds.n_features());
    println!("features: {}", ds.feature_names().join(", "));
    let col0 = ds.x().column(0).to_owned();
    println!("first feature mean {:.2e}, sd {:.4}", col0.mean().unwrap(), col0.std(1.0));
    Ok(())
}
