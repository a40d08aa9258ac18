use serde::{Deserialize, Serialize};

use super::desc::{mean, variance};
use super::dist::t_sf;
use super::{check_finite, Sided, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMode {
    Paired,
    /// Pooled-variance two-sample test.
    Unpaired,
    /// Unequal-variance two-sample test with Welch-Satterthwaite df.
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// Mean of `a - b` (paired) or difference of means.
    pub mean_diff: f64,
    /// Zero standard error. `t` is 0 with p = 1 when the difference is also
    /// zero, and infinite with p = 0 otherwise.
    pub degenerate: bool,
}

fn p_value(t: f64, df: f64, sided: Sided) -> f64 {
    match sided {
        Sided::One => t_sf(t, df),
        Sided::Two => (2.0 * t_sf(t.abs(), df)).min(1.0),
    }
}

fn finish(diff: f64, se: f64, df: f64, sided: Sided) -> TTest {
    if se == 0.0 {
        let (t, p) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            let t = diff.signum() * f64::INFINITY;
            (t, p_value(t, df, sided))
        };
        return TTest { t, df, p, mean_diff: diff, degenerate: true };
    }
    let t = diff / se;
    TTest { t, df, p: p_value(t, df, sided), mean_diff: diff, degenerate: false }
}

/// Student t-test of `a` against `b`. One-sided tests use the alternative
/// `mean(a) > mean(b)`.
pub fn ttest(a: &[f64], b: &[f64], mode: TestMode, sided: Sided) -> Result<TTest, StatsError> {
    check_finite(a)?;
    check_finite(b)?;
    match mode {
        TestMode::Paired => {
            if a.len() != b.len() {
                return Err(StatsError::LengthMismatch(a.len(), b.len()));
            }
            if a.len() < 2 {
                return Err(StatsError::InsufficientData { needed: 2, got: a.len() });
            }
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let n = d.len() as f64;
            let se = (variance(&d) / n).sqrt();
            Ok(finish(mean(&d), se, n - 1.0, sided))
        }
        TestMode::Unpaired | TestMode::Welch => {
            let got = a.len().min(b.len());
            if got < 2 {
                return Err(StatsError::InsufficientData { needed: 2, got });
            }
            let (na, nb) = (a.len() as f64, b.len() as f64);
            let (va, vb) = (variance(a), variance(b));
            let diff = mean(a) - mean(b);
            if mode == TestMode::Unpaired {
                let df = na + nb - 2.0;
                let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
                Ok(finish(diff, (sp2 * (1.0 / na + 1.0 / nb)).sqrt(), df, sided))
            } else {
                let (qa, qb) = (va / na, vb / nb);
                let se2 = qa + qb;
                let df = if se2 == 0.0 {
                    na + nb - 2.0
                } else {
                    se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
                };
                Ok(finish(diff, se2.sqrt(), df, sided))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_paths() {
        let a = [1.0, 2.0, 3.0];
        let r = ttest(&a, &a, TestMode::Paired, Sided::Two).unwrap();
        assert!(r.degenerate);
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let r = ttest(&[2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0], TestMode::Paired, Sided::Two).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p, 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(ttest(&[1.0], &[1.0], TestMode::Paired, Sided::Two), Err(StatsError::InsufficientData { needed: 2, got: 1 }));
        assert_eq!(ttest(&[1.0, 2.0], &[1.0], TestMode::Paired, Sided::Two), Err(StatsError::LengthMismatch(2, 1)));
        assert_eq!(ttest(&[1.0, f64::NAN], &[1.0, 2.0], TestMode::Unpaired, Sided::Two), Err(StatsError::NonFinite));
    }

    #[test]
    fn known_values() {
        // a = [1,2,3,4,5], b = [2,4,6,8,10]: pooled var 6.25, t = -3 / sqrt(6.25 * 0.4)
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let r = ttest(&a, &b, TestMode::Unpaired, Sided::Two).unwrap();
        assert!((r.t - (-3.0 / (6.25f64 * 0.4).sqrt())).abs() < 1e-12);
        assert_eq!(r.df, 8.0);
        let w = ttest(&a, &b, TestMode::Welch, Sided::Two).unwrap();
        // se^2 = 2.5/5 + 10/5 = 2.5, df = 2.5^2 / (0.25/4 + 4/4)
        assert!((w.df - 6.25 / 1.0625).abs() < 1e-12);
        let one = ttest(&b, &a, TestMode::Unpaired, Sided::One).unwrap();
        assert!((one.p - r.p / 2.0).abs() < 1e-12);
    }
}
