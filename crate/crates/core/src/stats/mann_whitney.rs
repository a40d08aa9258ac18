use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dist::normal_cdf;
use super::{check_finite, StatsError};

/// Largest group size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U for the first sample: pairs where it is larger, ties counting half.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: MwMethod,
}

/// Average ranks (1-based) of `xs`, ties sharing the mean of their positions.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Null distribution of twice the rank sum of a group of size `m`, drawn
/// without replacement from `doubled_ranks`. Maps value to count of subsets.
fn rank_sum_counts(doubled_ranks: &[u64], m: usize) -> BTreeMap<u64, f64> {
    // dp[j] = counts of sums over subsets of size j
    let mut dp: Vec<BTreeMap<u64, f64>> = vec![BTreeMap::new(); m + 1];
    dp[0].insert(0, 1.0);
    for &r in doubled_ranks {
        for j in (1..=m).rev() {
            let prev: Vec<(u64, f64)> = dp[j - 1].iter().map(|(&s, &c)| (s, c)).collect();
            for (s, c) in prev {
                *dp[j].entry(s + r).or_insert(0.0) += c;
            }
        }
    }
    dp.swap_remove(m)
}

/// Exact null distribution of U for the first group, as (U, probability)
/// pairs in increasing U, conditional on the observed tie pattern.
pub fn exact_u_distribution(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let doubled: Vec<u64> = midranks(&all).iter().map(|r| (r * 2.0).round() as u64).collect();
    let m = a.len();
    let counts = rank_sum_counts(&doubled, m);
    let total: f64 = counts.values().sum();
    let offset = (m * (m + 1)) as f64 / 2.0;
    counts.into_iter().map(|(s2, c)| (s2 as f64 / 2.0 - offset, c / total)).collect()
}

/// Mann-Whitney U test, two-sided.
///
/// Exact when both groups have at most [`EXACT_MAX_N`] values, otherwise the
/// normal approximation with tie-corrected variance and a 0.5 continuity
/// correction.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    check_finite(a)?;
    check_finite(b)?;
    let got = a.len().min(b.len());
    if got == 0 {
        return Err(StatsError::InsufficientData { needed: 1, got });
    }
    let (na, nb) = (a.len(), b.len());
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&all);
    let ra: f64 = ranks[..na].iter().sum();
    let u = ra - (na * (na + 1)) as f64 / 2.0;

    if na <= EXACT_MAX_N && nb <= EXACT_MAX_N {
        let dist = exact_u_distribution(a, b);
        // small tolerance: U values are multiples of 0.5
        let lower: f64 = dist.iter().filter(|(x, _)| *x <= u + 1e-9).map(|(_, p)| p).sum();
        let upper: f64 = dist.iter().filter(|(x, _)| *x >= u - 1e-9).map(|(_, p)| p).sum();
        let p = (2.0 * lower.min(upper)).min(1.0);
        return Ok(MannWhitney { u, p, method: MwMethod::Exact });
    }

    let (fa, fb) = (na as f64, nb as f64);
    let n = fa + fb;
    let mu = fa * fb / 2.0;
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = fa * fb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(MannWhitney { u, p: 1.0, method: MwMethod::Normal });
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let p = (2.0 * (1.0 - normal_cdf(z))).min(1.0);
    Ok(MannWhitney { u, p, method: MwMethod::Normal })
}
