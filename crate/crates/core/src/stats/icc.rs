use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::effect::Interval;
use super::StatsError;

/// Two-way ANOVA decomposition of a targets x raters matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSquares {
    pub n: usize,
    pub k: usize,
    /// Between targets (rows).
    pub msr: f64,
    /// Between raters (columns).
    pub msc: f64,
    pub mse: f64,
}

impl MeanSquares {
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, StatsError> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(StatsError::DegenerateMatrix(format!("need at least 2x2, got {n}x{k}")));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(StatsError::DegenerateMatrix("rows differ in length".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        let (nf, kf) = (n as f64, k as f64);
        let grand = rows.iter().flatten().sum::<f64>() / (nf * kf);
        let row_means: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
        let col_means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
        let ssr = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
        let ssc = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
        // residual sum taken directly rather than as SST - SSR - SSC, which
        // cancels badly when agreement is near perfect
        let sse: f64 = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, x)| (i, j, *x)))
            .map(|(i, j, x)| (x - row_means[i] - col_means[j] + grand).powi(2))
            .sum();
        Ok(Self {
            n,
            k,
            msr: ssr / (nf - 1.0),
            msc: ssc / (kf - 1.0),
            mse: sse / ((nf - 1.0) * (kf - 1.0)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IccVariant {
    /// Two-way random effects, absolute agreement, single rater.
    #[serde(rename = "ICC2")]
    Icc2,
    /// Two-way random effects, absolute agreement, mean of k raters.
    #[serde(rename = "ICC2k")]
    Icc2k,
    /// Two-way mixed effects, consistency, single rater.
    #[serde(rename = "ICC3")]
    Icc3,
    /// Two-way mixed effects, consistency, mean of k raters.
    #[serde(rename = "ICC3k")]
    Icc3k,
}

impl IccVariant {
    pub const ALL: [IccVariant; 4] = [IccVariant::Icc2, IccVariant::Icc2k, IccVariant::Icc3, IccVariant::Icc3k];

    pub fn as_str(self) -> &'static str {
        match self {
            IccVariant::Icc2 => "ICC2",
            IccVariant::Icc2k => "ICC2k",
            IccVariant::Icc3 => "ICC3",
            IccVariant::Icc3k => "ICC3k",
        }
    }

    pub fn is_average(self) -> bool {
        matches!(self, IccVariant::Icc2k | IccVariant::Icc3k)
    }
}

impl std::str::FromStr for IccVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IccVariant::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown ICC variant {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccEstimate {
    pub variant: IccVariant,
    pub value: f64,
    pub ci95: Interval,
    /// F statistic for the null of no agreement, with its df and p-value.
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccReport {
    pub mean_squares: MeanSquares,
    pub estimates: Vec<IccEstimate>,
}

impl IccReport {
    pub fn get(&self, v: IccVariant) -> &IccEstimate {
        self.estimates.iter().find(|e| e.variant == v).expect("all variants estimated")
    }
}

fn f_ppf(q: f64, d1: f64, d2: f64) -> f64 {
    FisherSnedecor::new(d1, d2).expect("positive df").inverse_cdf(q)
}

fn f_sf(x: f64, d1: f64, d2: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    FisherSnedecor::new(d1, d2).expect("positive df").sf(x)
}

/// Intraclass correlations of a targets x raters matrix with 95% intervals.
///
/// Point estimates are the Shrout-Fleiss mean-square formulas. The ICC3
/// intervals are the exact F intervals; the ICC2 intervals use the
/// McGraw-Wong approximation with Satterthwaite degrees of freedom.
pub fn icc(rows: &[Vec<f64>]) -> Result<IccReport, StatsError> {
    let ms = MeanSquares::from_matrix(rows)?;
    let MeanSquares { n, k, msr, msc, mse } = ms;
    let (nf, kf) = (n as f64, k as f64);
    if msr == 0.0 && mse == 0.0 {
        return Err(StatsError::DegenerateMatrix("no variance between or within targets".into()));
    }
    let df1 = nf - 1.0;
    let df2 = (nf - 1.0) * (kf - 1.0);
    let alpha = 0.05;

    let icc2 = (msr - mse) / (msr + (kf - 1.0) * mse + kf * (msc - mse) / nf);
    let icc2k = (msr - mse) / (msr + (msc - mse) / nf);
    let icc3 = (msr - mse) / (msr + (kf - 1.0) * mse);
    let icc3k = (msr - mse) / msr;

    if mse == 0.0 {
        // raters agree exactly on every target
        let all = |variant, value| IccEstimate {
            variant,
            value,
            ci95: Interval { lo: value, hi: value },
            f: f64::INFINITY,
            df1,
            df2,
            p: 0.0,
        };
        return Ok(IccReport {
            mean_squares: ms,
            estimates: vec![
                all(IccVariant::Icc2, icc2),
                all(IccVariant::Icc2k, icc2k),
                all(IccVariant::Icc3, icc3),
                all(IccVariant::Icc3k, icc3k),
            ],
        });
    }

    let f3 = msr / mse;
    let p3 = f_sf(f3, df1, df2);
    let f_lb = f3 / f_ppf(1.0 - alpha / 2.0, df1, df2);
    let f_ub = f3 * f_ppf(1.0 - alpha / 2.0, df2, df1);
    let ci3 = Interval { lo: (f_lb - 1.0) / (f_lb + kf - 1.0), hi: (f_ub - 1.0) / (f_ub + kf - 1.0) };
    let ci3k = Interval { lo: 1.0 - 1.0 / f_lb, hi: 1.0 - 1.0 / f_ub };

    let fc = msc / mse;
    let vn = df2 * (kf * icc2 * fc + nf * (1.0 + (kf - 1.0) * icc2) - kf * icc2).powi(2);
    let vd = (kf - 1.0) * kf.powi(2) * icc2.powi(2) * fc.powi(2) + (nf * (1.0 + (kf - 1.0) * icc2) - kf * icc2).powi(2);
    let v = vn / vd;
    let f2u = f_ppf(1.0 - alpha / 2.0, nf - 1.0, v);
    let f2l = f_ppf(1.0 - alpha / 2.0, v, nf - 1.0);
    let lo2 = nf * (msr - f2u * mse) / (f2u * (kf * msc + (kf * nf - kf - nf) * mse) + nf * msr);
    let hi2 = nf * (f2l * msr - mse) / (kf * msc + (kf * nf - kf - nf) * mse + nf * f2l * msr);
    let ci2 = Interval { lo: lo2, hi: hi2 };
    let spearman_brown = |x: f64| x * kf / (1.0 + x * (kf - 1.0));
    let ci2k = Interval { lo: spearman_brown(lo2), hi: spearman_brown(hi2) };

    let est = |variant, value, ci95| IccEstimate { variant, value, ci95, f: f3, df1, df2, p: p3 };
    Ok(IccReport {
        mean_squares: ms,
        estimates: vec![
            est(IccVariant::Icc2, icc2, ci2),
            est(IccVariant::Icc2k, icc2k, ci2k),
            est(IccVariant::Icc3, icc3, ci3),
            est(IccVariant::Icc3k, icc3k, ci3k),
        ],
    })
}
