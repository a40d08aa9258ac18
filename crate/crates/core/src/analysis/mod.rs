//! Trial analysis over the ratings dataset: per-arm score changes,
//! between-arm comparisons, rater agreement, sensitivity subsets, the
//! randomization check and sample-size planning.

pub mod adapter;
mod dataset;
mod demographics;
mod report;
pub mod synthetic;
mod text;

use serde::{Deserialize, Serialize};

pub use dataset::{conversation_id, write_ratings_csv, DatasetSummary, RatingRow, RatingsDataset, MAX_RATINGS_PER_CONVERSATION};
pub use demographics::{randomization_check, DemographicRow, Demographics, RandomizationCheck};
pub use report::{
    analyze, between_arm, icc_section, participant_scores, power_table, sensitivity_analysis, sp_check, table3,
    AnalysisOptions, ArmTable, BaselineRow, BetweenRow, IccSection, MeanSd, ParticipantScores, PowerParams, PowerRow,
    Sections, SensitivityReport, SpCheckRow, StatsReport, Table3, WithinRow,
};
pub use text::render_text;

/// Which of a participant's two conversations a rating belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Pre,
    Post,
}

impl Order {
    pub fn as_str(self) -> &'static str {
        match self {
            Order::Pre => "Pre",
            Order::Post => "Post",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(String),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: u64, column: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Schema { line: u64, column: usize, message: String },
    #[error("line {line}: duplicate rating by {rater} for {participant} {order:?}")]
    DuplicateRating { line: u64, participant: String, order: Order, rater: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Rubric(#[from] crate::rubric::RubricError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error("sensitivity subset leaves no {0} participants")]
    EmptySubset(crate::rubric::Arm),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}
