use serde::{Deserialize, Serialize};

use super::hedge::{count_hedge_words, HedgeLexicon};
use crate::skill::{question_sentences, QuestionKind};
use crate::text::{self, Span};
use crate::transcript::{Speaker, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("trainee turns lack start/end timestamps")]
    MissingTimestamps,
    #[error("text has no words")]
    EmptyText,
}

/// A metric that may be withheld when its inputs are missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Metric {
    Value { value: f64 },
    Omitted { reason: String },
}

impl Metric {
    pub fn value(&self) -> Option<f64> {
        match self {
            Metric::Value { value } => Some(*value),
            Metric::Omitted { .. } => None,
        }
    }

    fn from_result(r: Result<f64, MetricError>) -> Self {
        match r {
            Ok(value) => Metric::Value { value },
            Err(e) => Metric::Omitted { reason: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HedgeInstance {
    /// Index of the turn in the transcript.
    pub turn: usize,
    /// Byte span inside that turn's text.
    pub span: Span,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub hedge_count: usize,
    pub hedges: Vec<HedgeInstance>,
    /// Trainee words per minute of trainee speech.
    pub speaking_rate: Metric,
    /// Flesch-Kincaid grade of the trainee's speech.
    pub reading_level: Metric,
    pub questions_total: usize,
    pub open_ended_count: usize,
    pub trainee_word_share: f64,
    pub longest_monologue: usize,
    pub excessive_speaking: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReadabilityCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

impl std::ops::Add for ReadabilityCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { words: self.words + o.words, sentences: self.sentences + o.sentences, syllables: self.syllables + o.syllables }
    }
}

pub fn readability_counts(text: &str) -> ReadabilityCounts {
    let words = text::words(text);
    ReadabilityCounts {
        words: words.len(),
        sentences: text::sentences(text).len(),
        syllables: words.iter().map(|w| text::syllables(&w.norm)).sum(),
    }
}

/// `0.39 * words/sentences + 11.8 * syllables/words - 15.59`, clamped at 0.
pub fn flesch_kincaid(c: ReadabilityCounts) -> Result<f64, MetricError> {
    if c.words == 0 || c.sentences == 0 {
        return Err(MetricError::EmptyText);
    }
    let w = c.words as f64;
    let grade = 0.39 * (w / c.sentences as f64) + 11.8 * (c.syllables as f64 / w) - 15.59;
    Ok(grade.max(0.0))
}

pub fn reading_level(text: &str) -> Result<f64, MetricError> {
    flesch_kincaid(readability_counts(text))
}

/// Trainee reading level, counting sentences turn by turn so an unpunctuated
/// turn does not run into the next one.
pub fn transcript_reading_level(transcript: &Transcript) -> Result<f64, MetricError> {
    let counts = transcript
        .trainee_turns()
        .map(|(_, t)| readability_counts(&t.text))
        .fold(ReadabilityCounts::default(), |a, b| a + b);
    flesch_kincaid(counts)
}

/// Trainee words per minute of trainee speaking time. Every trainee turn
/// with words must carry both timestamps.
pub fn speaking_rate(transcript: &Transcript) -> Result<f64, MetricError> {
    let mut words = 0usize;
    let mut ms = 0u64;
    for (_, t) in transcript.trainee_turns() {
        let n = t.word_count();
        if n == 0 {
            continue;
        }
        match (t.start_ms, t.end_ms) {
            (Some(a), Some(b)) if b > a => ms += b - a,
            _ => return Err(MetricError::MissingTimestamps),
        }
        words += n;
    }
    if words == 0 {
        return Ok(0.0);
    }
    Ok(words as f64 / (ms as f64 / 60_000.0))
}

/// Question sentences in trainee turns, and how many of them are open-ended.
pub fn question_metrics(transcript: &Transcript) -> (usize, usize) {
    let mut total = 0;
    let mut open = 0;
    for (_, t) in transcript.trainee_turns() {
        for (_, kind) in question_sentences(&t.text) {
            match kind {
                QuestionKind::OpenEnded => {
                    total += 1;
                    open += 1;
                }
                QuestionKind::Closed => total += 1,
                QuestionKind::NotAQuestion => {}
            }
        }
    }
    (total, open)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnTaking {
    pub trainee_word_share: f64,
    pub longest_monologue: usize,
    pub excessive_speaking: bool,
}

/// Share of all words spoken by the trainee, the longest trainee turn in
/// words, and whether the share exceeds `threshold`.
pub fn turn_taking(transcript: &Transcript, threshold: f64) -> TurnTaking {
    let mut trainee = 0usize;
    let mut all = 0usize;
    let mut longest = 0usize;
    for t in transcript.turns() {
        let n = t.word_count();
        all += n;
        if t.speaker == Speaker::Trainee {
            trainee += n;
            longest = longest.max(n);
        }
    }
    let share = if all == 0 { 0.0 } else { trainee as f64 / all as f64 };
    TurnTaking { trainee_word_share: share, longest_monologue: longest, excessive_speaking: share > threshold }
}

pub fn hedge_instances(transcript: &Transcript, lexicon: &HedgeLexicon) -> Vec<HedgeInstance> {
    transcript
        .trainee_turns()
        .flat_map(|(i, t)| {
            count_hedge_words(&t.text, lexicon)
                .1
                .into_iter()
                .map(move |span| HedgeInstance { turn: i, span, text: span.slice(&t.text).to_string() })
        })
        .collect()
}

pub fn compute_metrics(transcript: &Transcript, lexicon: &HedgeLexicon, excessive_share: f64) -> MetricSet {
    let hedges = hedge_instances(transcript, lexicon);
    let (questions_total, open_ended_count) = question_metrics(transcript);
    let tt = turn_taking(transcript, excessive_share);
    let reading = match transcript_reading_level(transcript) {
        Err(MetricError::EmptyText) => Metric::Omitted { reason: "no trainee speech".into() },
        r => Metric::from_result(r),
    };
    MetricSet {
        hedge_count: hedges.len(),
        hedges,
        speaking_rate: Metric::from_result(speaking_rate(transcript)),
        reading_level: reading,
        questions_total,
        open_ended_count,
        trainee_word_share: tt.trainee_word_share,
        longest_monologue: tt.longest_monologue,
        excessive_speaking: tt.excessive_speaking,
    }
}
