//! Time-ordered conversation record shared by the dialogue engine, the
//! feedback engine and the session service.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dialogue::EmotionTag;
use crate::skill::SkillLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Trainee,
    Patient,
}

/// One utterance.
///
/// Timestamps are milliseconds from session start as reported by the caller.
/// Trainee turns carry their skill labels; patient turns carry the emotion
/// shown and the skill the schema node invites next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub labels: BTreeSet<SkillLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<EmotionTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expects: Option<SkillLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
}

impl Turn {
    pub fn trainee(text: impl Into<String>) -> Self {
        Self {
            speaker: Speaker::Trainee,
            text: text.into(),
            start_ms: None,
            end_ms: None,
            labels: BTreeSet::new(),
            emotion: None,
            expects: None,
            node: None,
        }
    }

    pub fn patient(text: impl Into<String>, emotion: EmotionTag) -> Self {
        Self { speaker: Speaker::Patient, emotion: Some(emotion), ..Self::trainee(text) }
    }

    pub fn timed(mut self, start_ms: u64, end_ms: u64) -> Self {
        self.start_ms = Some(start_ms);
        self.end_ms = Some(end_ms);
        self
    }

    pub fn with_labels(mut self, labels: impl IntoIterator<Item = SkillLabel>) -> Self {
        self.labels = labels.into_iter().collect();
        self
    }

    pub fn expecting(mut self, skill: Option<SkillLabel>) -> Self {
        self.expects = skill;
        self
    }

    pub fn is_trainee(&self) -> bool {
        self.speaker == Speaker::Trainee
    }

    pub fn word_count(&self) -> usize {
        crate::text::word_count(&self.text)
    }

    /// Latest timestamp on the turn.
    pub fn last_ms(&self) -> Option<u64> {
        self.end_ms.or(self.start_ms)
    }
}

/// Append-only list of turns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript {
    turns: Vec<Turn>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, turn: Turn) -> usize {
        self.turns.push(turn);
        self.turns.len() - 1
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Turn> {
        self.turns.get(index)
    }

    pub fn last(&self) -> Option<&Turn> {
        self.turns.last()
    }

    pub fn trainee_turns(&self) -> impl Iterator<Item = (usize, &Turn)> {
        self.turns.iter().enumerate().filter(|(_, t)| t.is_trainee())
    }

    /// The last `n` turns (all of them when fewer exist).
    pub fn window(&self, n: usize) -> &[Turn] {
        &self.turns[self.turns.len().saturating_sub(n)..]
    }
}

impl FromIterator<Turn> for Transcript {
    fn from_iter<I: IntoIterator<Item = Turn>>(iter: I) -> Self {
        Self { turns: iter.into_iter().collect() }
    }
}
