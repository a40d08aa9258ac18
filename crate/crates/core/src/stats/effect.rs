use serde::{Deserialize, Serialize};

use super::desc::{mean, sd, variance};
use super::dist::t_quantile;
use super::{check_finite, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectMode {
    /// `mean(a - b) / sd(a - b)`.
    PairedDiffs,
    /// `(mean(a) - mean(b)) / pooled sd`.
    IndependentPooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

pub fn pooled_sd(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    (((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0)).sqrt()
}

/// Standardized mean of one sample of differences.
pub fn paired_d(diffs: &[f64]) -> Result<f64, StatsError> {
    check_finite(diffs)?;
    if diffs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: diffs.len() });
    }
    let s = sd(diffs);
    if s == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(mean(diffs) / s)
}

pub fn cohens_d(a: &[f64], b: &[f64], mode: EffectMode) -> Result<f64, StatsError> {
    check_finite(a)?;
    check_finite(b)?;
    match mode {
        EffectMode::PairedDiffs => {
            if a.len() != b.len() {
                return Err(StatsError::LengthMismatch(a.len(), b.len()));
            }
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            paired_d(&d)
        }
        EffectMode::IndependentPooled => {
            let got = a.len().min(b.len());
            if got < 2 {
                return Err(StatsError::InsufficientData { needed: 2, got });
            }
            let s = pooled_sd(a, b);
            if s == 0.0 {
                return Err(StatsError::ZeroVariance);
            }
            Ok((mean(a) - mean(b)) / s)
        }
    }
}

/// Two-sided t interval for the mean at confidence `level`.
pub fn mean_ci(xs: &[f64], level: f64) -> Result<Interval, StatsError> {
    check_finite(xs)?;
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: xs.len() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidParams(format!("confidence level {level}")));
    }
    let n = xs.len() as f64;
    let m = mean(xs);
    let half = t_quantile(0.5 + level / 2.0, n - 1.0) * sd(xs) / n.sqrt();
    Ok(Interval { lo: m - half, hi: m + half })
}

pub fn ci95(xs: &[f64]) -> Result<Interval, StatsError> {
    mean_ci(xs, 0.95)
}
