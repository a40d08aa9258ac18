//! Hybrid 3E skill classification.
//!
//! A deterministic rule layer ([`RuleSet`]) is unioned with an optional set of
//! labels produced by an external statistical classifier. The external model
//! is never called from here; callers pass its labels in.

mod classify;
mod lexicon;
mod pattern;
mod question;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use classify::{classify_utterance, merge_labels, Evidence, LabelSource, SkillClassification};
pub use lexicon::{LexiconError, LexiconRule, RuleSet};
pub use pattern::{Pattern, PatternError};
pub use question::{detect_question, question_sentences, QuestionKind};

/// One of the three communication skills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkillLabel {
    Empathize,
    Explicit,
    Empower,
}

impl SkillLabel {
    pub const ALL: [SkillLabel; 3] = [SkillLabel::Empathize, SkillLabel::Explicit, SkillLabel::Empower];

    pub fn as_str(self) -> &'static str {
        match self {
            SkillLabel::Empathize => "empathize",
            SkillLabel::Explicit => "explicit",
            SkillLabel::Empower => "empower",
        }
    }

    /// Human-facing name ("Be Explicit").
    pub fn title(self) -> &'static str {
        match self {
            SkillLabel::Empathize => "Empathize",
            SkillLabel::Explicit => "Be Explicit",
            SkillLabel::Empower => "Empower",
        }
    }
}

impl fmt::Display for SkillLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown skill {0:?}")]
pub struct UnknownSkill(pub String);

impl FromStr for SkillLabel {
    type Err = UnknownSkill;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "empathize" | "empathise" | "empathy" => Ok(SkillLabel::Empathize),
            "explicit" | "be explicit" | "be_explicit" => Ok(SkillLabel::Explicit),
            "empower" => Ok(SkillLabel::Empower),
            _ => Err(UnknownSkill(s.to_string())),
        }
    }
}
