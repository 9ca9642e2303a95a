//! Dunn's all-pairs test on rank sums with Benjamini-Hochberg adjustment.

use alr::stats::compare_groups;

fn main() -> alr::Result<()> {
    let names: Vec<String> = ["BL", "GS", "RD"].iter().map(|s| s.to_string()).collect();
    let groups = vec![
        vec![1.00, 1.00, 1.00, 1.00, 1.00, 1.00],
        vec![0.93, 0.97, 0.88, 1.01, 0.95, 0.91],
        vec![0.82, 0.86, 0.79, 0.90, 0.84, 0.88],
    ];
    let report = compare_groups(&names, &groups, 0.05)?;
    println!("mean ranks {:?}", report.mean_ranks);
    for p in &report.pairs {
        println!(
            "{:>3} vs {:<3} z = {:6.3}  p = {:.4}  adjusted = {:.4}  {}",
            p.row,
            p.col,
            p.z,
            p.p_raw,
            p.p_adjusted,
            if p.significant { "*" } else { "" }
        );
    }
    print!("{}", report.triangular_csv());
    Ok(())
}
