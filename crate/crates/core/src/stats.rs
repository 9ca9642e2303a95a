//! Dunn's multiple-comparison procedure on pooled ranks with
//! Benjamini-Hochberg false-discovery-rate adjustment.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Average ranks (1-based) of `values`; tied values share the mean of the
/// ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of runs of equal values.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        sizes.push(j - i + 1);
        i = j + 1;
    }
    sizes
}

/// Two-sided standard normal tail probability `2 (1 - Phi(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Pairwise z statistics and raw two-sided p-values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnResult {
    pub mean_ranks: Vec<f64>,
    /// `z[i][j] = (R_i - R_j) / se_ij`.
    pub z: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

pub fn dunn_pairwise(groups: &[Vec<f64>]) -> Result<DunnResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("Dunn's test needs at least two groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("every group needs at least two observations"));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite observation"));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let total = pooled.len() as f64;
    let ranks = average_ranks(&pooled);

    let mut mean_ranks = Vec::with_capacity(groups.len());
    let mut offset = 0;
    for g in groups {
        let sum: f64 = ranks[offset..offset + g.len()].iter().sum();
        mean_ranks.push(sum / g.len() as f64);
        offset += g.len();
    }

    let tie_correction: f64 = tie_sizes(&pooled)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / (12.0 * (total - 1.0));
    let spread = total * (total + 1.0) / 12.0 - tie_correction;

    let k = groups.len();
    let mut z = vec![vec![0.0; k]; k];
    let mut p = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let var = spread * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64);
            if var <= 0.0 {
                continue;
            }
            let zij = (mean_ranks[i] - mean_ranks[j]) / var.sqrt();
            z[i][j] = zij;
            p[i][j] = two_sided_p(zij);
        }
    }
    Ok(DunnResult { mean_ranks, z, p })
}

/// Benjamini-Hochberg step-up adjustment. Returns adjusted p-values in input
/// order and the flags `adjusted < alpha`.
pub fn fdr_bh(raw: &[f64], alpha: f64) -> Result<(Vec<f64>, Vec<bool>)> {
    if raw.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("p-values must lie in [0, 1]"));
    }
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0_f64;
    for pos in (0..m).rev() {
        let i = order[pos];
        let candidate = raw[i] * m as f64 / (pos + 1) as f64;
        running = running.min(candidate);
        adjusted[i] = running.min(1.0);
    }
    let flags = adjusted.iter().map(|&p| p < alpha).collect();
    Ok((adjusted, flags))
}

/// One pairwise comparison in the lower triangle (`row > col`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub row: String,
    pub col: String,
    pub z: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub names: Vec<String>,
    pub alpha: f64,
    pub mean_ranks: Vec<f64>,
    pub pairs: Vec<PairComparison>,
}

impl ComparisonReport {
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairComparison> {
        self.pairs
            .iter()
            .find(|p| (p.row == a && p.col == b) || (p.row == b && p.col == a))
    }

    /// Lower-triangular table of adjusted p-values with four decimals; rows
    /// are the 2nd..k-th names, columns the 1st..(k-1)-th.
    pub fn triangular_csv(&self) -> String {
        let k = self.names.len();
        let mut out = String::new();
        out.push_str("strategy");
        for name in &self.names[..k.saturating_sub(1)] {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for i in 1..k {
            out.push_str(&self.names[i]);
            for j in 0..k - 1 {
                if j < i {
                    let p = self.pair(&self.names[i], &self.names[j]).expect("pair present");
                    let _ = write!(out, ",{:.4}", p.p_adjusted);
                } else {
                    out.push(',');
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Dunn's test over named groups followed by BH adjustment across all
/// `k (k - 1) / 2` pairs.
pub fn compare_groups(names: &[String], groups: &[Vec<f64>], alpha: f64) -> Result<ComparisonReport> {
    if names.len() != groups.len() {
        return Err(Error::DimensionMismatch {
            expected: groups.len(),
            actual: names.len(),
        });
    }
    let dunn = dunn_pairwise(groups)?;
    let k = names.len();
    let mut cells = Vec::new();
    for i in 1..k {
        for j in 0..i {
            cells.push((i, j));
        }
    }
    let raw: Vec<f64> = cells.iter().map(|&(i, j)| dunn.p[i][j]).collect();
    let (adjusted, flags) = fdr_bh(&raw, alpha)?;
    let pairs = cells
        .iter()
        .enumerate()
        .map(|(c, &(i, j))| PairComparison {
            row: names[i].clone(),
            col: names[j].clone(),
            z: dunn.z[i][j],
            p_raw: raw[c],
            p_adjusted: adjusted[c],
            significant: flags[c],
        })
        .collect();
    Ok(ComparisonReport {
        names: names.to_vec(),
        alpha,
        mean_ranks: dunn.mean_ranks,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0, 2.0]), vec![1.5, 1.5, 3.5, 3.5]);
    }

    #[test]
    fn identical_groups_give_p_one() {
        let g = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        let r = dunn_pairwise(&g).unwrap();
        assert!((r.p[0][1] - 1.0).abs() < 1e-12);
        let flat = vec![vec![4.0, 4.0], vec![4.0, 4.0], vec![4.0, 4.0]];
        let r = dunn_pairwise(&flat).unwrap();
        assert!(r.p.iter().flatten().all(|&p| p == 1.0));
    }

    #[test]
    fn separated_groups_hand_value() {
        let g = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![6.0, 7.0, 8.0, 9.0, 10.0]];
        let r = dunn_pairwise(&g).unwrap();
        assert_eq!(r.mean_ranks, vec![3.0, 8.0]);
        let z = 5.0 / ((10.0 * 11.0 / 12.0) * 0.4_f64).sqrt();
        assert!((r.z[1][0] - z).abs() < 1e-12);
        assert!((r.z[1][0] - 2.611).abs() < 1e-3);
        assert!((r.p[0][1] - 0.009).abs() < 5e-4);
    }

    #[test]
    fn bad_inputs() {
        assert!(dunn_pairwise(&[vec![1.0, 2.0]]).is_err());
        assert!(dunn_pairwise(&[vec![1.0], vec![2.0, 3.0]]).is_err());
        assert!(fdr_bh(&[1.5], 0.05).is_err());
    }

    #[test]
    fn bh_hand_example() {
        let (adj, flags) = fdr_bh(&[0.01, 0.02, 0.04], 0.05).unwrap();
        let want = [0.03, 0.03, 0.04];
        for (a, w) in adj.iter().zip(want) {
            assert!((a - w).abs() < 1e-12);
        }
        assert_eq!(flags, vec![true, true, true]);

        let (adj, flags) = fdr_bh(&[0.0, 0.0], 0.05).unwrap();
        assert_eq!(adj, vec![0.0, 0.0]);
        assert!(flags.iter().all(|&f| f));

        let (adj, _) = fdr_bh(&[0.3], 0.05).unwrap();
        assert_eq!(adj, vec![0.3]);
    }

    #[test]
    fn triangular_layout() {
        let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let groups = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let report = compare_groups(&names, &groups, 0.05).unwrap();
        let csv = report.triangular_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "strategy,A,B");
        assert!(lines[1].starts_with("B,0."));
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2].split(',').count(), 3);
    }
}
