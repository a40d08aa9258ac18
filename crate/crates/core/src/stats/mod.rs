//! Trial statistics: t-tests, effect sizes, intervals, ICC, Mann-Whitney,
//! logistic regression and sample-size calculation.
//!
//! Distribution functions come from `statrs`; everything else is computed
//! here from sums and mean squares.

mod desc;
mod dist;
mod effect;
mod icc;
mod logistic;
mod mann_whitney;
mod power;
mod ttest;

use serde::{Deserialize, Serialize};

pub use desc::{mean, sd, variance};
pub use dist::{normal_cdf, normal_quantile, t_quantile, t_sf};
pub use effect::{ci95, cohens_d, mean_ci, paired_d, pooled_sd, Interval, EffectMode};
pub use icc::{icc, IccReport, IccVariant, IccEstimate, MeanSquares};
pub use logistic::{logistic_irls, Coefficient, LogisticFit, LogisticOptions};
pub use mann_whitney::{exact_u_distribution, mann_whitney, midranks, MannWhitney, MwMethod, EXACT_MAX_N};
pub use power::power_sample_size;
pub use ttest::{ttest, TTest, TestMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    /// Alternative: the first sample's mean is larger.
    One,
    Two,
}

impl std::str::FromStr for Sided {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one" | "1" | "one-sided" => Ok(Sided::One),
            "two" | "2" | "two-sided" => Ok(Sided::Two),
            other => Err(format!("unknown sidedness {other:?} (expected one or two)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),
    #[error("perfect separation on column {column:?}")]
    SeparationDetected { column: String },
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("design matrix is singular")]
    SingularDesign,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite input value")]
    NonFinite,
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}
