//! The 18-item communication rubric and per-skill score normalization.
//!
//! Items 1-7 score Empower, 8-13 Explicit and 14-18 Empathize. Items 7, 13
//! and 18 are the overall judgement for their skill and use a 1-10 scale;
//! the rest use 1-5. Item 11 (jargon) is reverse-scored as `6 - v` before
//! any summation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::skill::SkillLabel;

pub const ITEM_COUNT: usize = 18;

/// Items on the 1-10 scale (1-based).
pub const TEN_POINT_ITEMS: [usize; 3] = [7, 13, 18];

/// Reverse-scored item (1-based).
pub const INVERTED_ITEM: usize = 11;

/// Raters per conversation: one standardized patient and four third-party reviewers.
pub const SP_RATERS: usize = 1;
pub const TP_RATERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RubricError {
    #[error("Likert value {0} outside 1..=5")]
    OutOfRange(u8),
    #[error("item q{item} = {value} is outside its scale")]
    InvalidRating { item: usize, value: u8 },
    #[error("expected {SP_RATERS} SP and {TP_RATERS} TP ratings, found {sp} SP and {tp} TP")]
    RaterCountMismatch { sp: usize, tp: usize },
    #[error("ratings belong to more than one conversation")]
    MixedConversations,
    #[error("no ratings")]
    NoRatings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RaterRole {
    SP,
    TP,
}

impl FromStr for RaterRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SP" => Ok(RaterRole::SP),
            "TP" => Ok(RaterRole::TP),
            other => Err(format!("unknown rater role {other:?}")),
        }
    }
}

/// A scored dimension: one of the three skills or all items together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Empower,
    Explicit,
    Empathize,
    Overall,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::Empower, Dimension::Explicit, Dimension::Empathize, Dimension::Overall];

    /// 1-based item numbers contributing to the dimension.
    pub fn items(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Dimension::Empower => 1..=7,
            Dimension::Explicit => 8..=13,
            Dimension::Empathize => 14..=18,
            Dimension::Overall => 1..=18,
        }
    }

    // FROZEN: the denominators are derived from the item scales, not given
    // anywhere as data. 40 = 6*5 + 10, 35 = 5*5 + 10, 30 = 4*5 + 10, 105 total.
    pub fn max_points(self) -> u32 {
        self.items().map(|i| item_max(i) as u32).sum()
    }

    pub fn min_points(self) -> u32 {
        self.items().count() as u32
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Empower => "empower",
            Dimension::Explicit => "explicit",
            Dimension::Empathize => "empathize",
            Dimension::Overall => "overall",
        }
    }
}

impl From<SkillLabel> for Dimension {
    fn from(s: SkillLabel) -> Self {
        match s {
            SkillLabel::Empathize => Dimension::Empathize,
            SkillLabel::Explicit => Dimension::Explicit,
            SkillLabel::Empower => Dimension::Empower,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper end of the scale for a 1-based item.
pub fn item_max(item: usize) -> u8 {
    if TEN_POINT_ITEMS.contains(&item) {
        10
    } else {
        5
    }
}

/// Reverse-scores a 1-5 Likert value.
pub fn invert_item(value: u8) -> Result<u8, RubricError> {
    if (1..=5).contains(&value) {
        Ok(6 - value)
    } else {
        Err(RubricError::OutOfRange(value))
    }
}

/// One rater's scores for one conversation, as recorded (item 11 not yet inverted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricRating {
    pub conversation_id: String,
    pub rater_id: String,
    pub role: RaterRole,
    items: [u8; ITEM_COUNT],
}

impl RubricRating {
    pub fn new(
        conversation_id: impl Into<String>,
        rater_id: impl Into<String>,
        role: RaterRole,
        items: [u8; ITEM_COUNT],
    ) -> Result<Self, RubricError> {
        for (i, &v) in items.iter().enumerate() {
            if !(1..=item_max(i + 1)).contains(&v) {
                return Err(RubricError::InvalidRating { item: i + 1, value: v });
            }
        }
        Ok(Self { conversation_id: conversation_id.into(), rater_id: rater_id.into(), role, items })
    }

    /// Raw item values, q1 first.
    pub fn items(&self) -> &[u8; ITEM_COUNT] {
        &self.items
    }

    /// Item values with item 11 reverse-scored.
    pub fn processed(&self) -> [u8; ITEM_COUNT] {
        let mut p = self.items;
        p[INVERTED_ITEM - 1] = 6 - p[INVERTED_ITEM - 1];
        p
    }

    /// Sum of the processed items of a dimension.
    pub fn points(&self, dim: Dimension) -> u32 {
        let p = self.processed();
        dim.items().map(|i| p[i - 1] as u32).sum()
    }

    /// Sum of all 18 processed items.
    pub fn qsum(&self) -> u32 {
        self.points(Dimension::Overall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Points divided by the maximum possible points.
    #[default]
    Eq1,
    /// `(points - min) / (max - min)`.
    MinMax,
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eq1" => Ok(Normalization::Eq1),
            "minmax" => Ok(Normalization::MinMax),
            other => Err(format!("unknown normalization {other:?} (expected eq1 or minmax)")),
        }
    }
}

pub fn skill_score_with(rating: &RubricRating, dim: Dimension, norm: Normalization) -> f64 {
    let pts = rating.points(dim) as f64;
    let max = dim.max_points() as f64;
    match norm {
        Normalization::Eq1 => pts / max,
        Normalization::MinMax => {
            let min = dim.min_points() as f64;
            (pts - min) / (max - min)
        }
    }
}

pub fn skill_score(rating: &RubricRating, dim: Dimension) -> f64 {
    skill_score_with(rating, dim, Normalization::Eq1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScoringOptions {
    /// Accept any non-empty rater set and average what is there.
    pub lenient: bool,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub conversation_id: String,
    pub empower: f64,
    pub explicit: f64,
    pub empathize: f64,
    pub overall: f64,
    pub n_raters: usize,
}

impl ScoreRecord {
    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Empower => self.empower,
            Dimension::Explicit => self.explicit,
            Dimension::Empathize => self.empathize,
            Dimension::Overall => self.overall,
        }
    }
}

/// Unweighted mean of per-rater scores for one conversation.
pub fn conversation_score(ratings: &[RubricRating], opts: ScoringOptions) -> Result<ScoreRecord, RubricError> {
    let first = ratings.first().ok_or(RubricError::NoRatings)?;
    if ratings.iter().any(|r| r.conversation_id != first.conversation_id) {
        return Err(RubricError::MixedConversations);
    }
    let sp = ratings.iter().filter(|r| r.role == RaterRole::SP).count();
    let tp = ratings.len() - sp;
    if !opts.lenient && (sp != SP_RATERS || tp != TP_RATERS) {
        return Err(RubricError::RaterCountMismatch { sp, tp });
    }
    let n = ratings.len() as f64;
    let mean = |dim| ratings.iter().map(|r| skill_score_with(r, dim, opts.normalization)).sum::<f64>() / n;
    Ok(ScoreRecord {
        conversation_id: first.conversation_id.clone(),
        empower: mean(Dimension::Empower),
        explicit: mean(Dimension::Explicit),
        empathize: mean(Dimension::Empathize),
        overall: mean(Dimension::Overall),
        n_raters: ratings.len(),
    })
}

/// Trial arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    Control,
    #[serde(rename = "SOPHIE")]
    Sophie,
}

impl Arm {
    pub const ALL: [Arm; 2] = [Arm::Control, Arm::Sophie];

    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Control => "Control",
            Arm::Sophie => "SOPHIE",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Post minus pre score for one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub participant_id: String,
    pub arm: Arm,
    pub empower: f64,
    pub explicit: f64,
    pub empathize: f64,
    pub overall: f64,
}

impl DeltaRecord {
    pub fn new(participant_id: impl Into<String>, arm: Arm, pre: &ScoreRecord, post: &ScoreRecord) -> Self {
        Self {
            participant_id: participant_id.into(),
            arm,
            empower: post.empower - pre.empower,
            explicit: post.explicit - pre.explicit,
            empathize: post.empathize - pre.empathize,
            overall: post.overall - pre.overall,
        }
    }

    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Empower => self.empower,
            Dimension::Explicit => self.explicit,
            Dimension::Empathize => self.empathize,
            Dimension::Overall => self.overall,
        }
    }
}
