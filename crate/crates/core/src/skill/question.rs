//! Question detection for the Empower metrics.
//!
//! A sentence is a question when it ends in `?`, when it opens (after an
//! optional discourse marker such as "so" or "okay") with a wh-word followed
//! by an auxiliary or with an auxiliary followed by a pronoun, or when it
//! matches a facilitative template ("what questions do you have", "tell me
//! more"). Wh-initial questions and facilitative templates are open-ended;
//! every other question is closed.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::pattern::Pattern;
use crate::text::{self, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    OpenEnded,
    Closed,
    NotAQuestion,
}

const WH_WORDS: &[&str] = &["what", "how", "why", "where", "when", "who", "whom", "whose", "which"];

const AUXILIARIES: &[&str] = &[
    "am", "are", "is", "was", "were", "do", "does", "did", "have", "has", "had", "can", "could",
    "will", "would", "shall", "should", "may", "might", "must",
];

const PRONOUNS: &[&str] = &["i", "you", "we", "they", "he", "she", "it", "there", "that", "this", "anyone", "your"];

const LEAD_INS: &[&str] = &["so", "and", "but", "well", "okay", "ok", "now", "then", "oh", "also", "um", "uh", "alright", "right"];

const FACILITATIVE: &[&str] = &[
    "what questions do you have",
    "what (other|else|more) ... questions",
    "(many|most|a lot of) (patients|people) have questions",
    "tell me (more|about)",
    "(can|could|would) you tell me",
    "(can|could|would) you (share|say) more",
    "help me understand",
    "walk me through",
];

fn facilitative() -> &'static [Pattern] {
    static PATS: OnceLock<Vec<Pattern>> = OnceLock::new();
    PATS.get_or_init(|| FACILITATIVE.iter().map(|p| Pattern::parse(p).expect("valid template")).collect())
}

fn classify_sentence(sentence: &str, terminated_by_question_mark: bool) -> QuestionKind {
    let toks = text::normalized(sentence);
    if facilitative().iter().any(|p| p.find(&toks).is_some()) {
        return QuestionKind::OpenEnded;
    }
    let body: Vec<&str> = toks
        .iter()
        .map(|t| t.norm.as_str())
        .skip_while(|w| LEAD_INS.contains(w))
        .collect();
    let first = body.first().copied();
    let second = body.get(1).copied();
    let wh_start = first.is_some_and(|w| WH_WORDS.contains(&w));
    let aux_start = first.is_some_and(|w| AUXILIARIES.contains(&w));
    let interrogative = terminated_by_question_mark
        || (wh_start && second.is_some_and(|w| AUXILIARIES.contains(&w)))
        || (aux_start && second.is_some_and(|w| PRONOUNS.contains(&w)));
    match (interrogative, wh_start) {
        (false, _) => QuestionKind::NotAQuestion,
        (true, true) => QuestionKind::OpenEnded,
        (true, false) => QuestionKind::Closed,
    }
}

/// Per-sentence question labelling of `text`.
pub fn question_sentences(text: &str) -> Vec<(Span, QuestionKind)> {
    text::sentences(text)
        .into_iter()
        .map(|s| {
            let kind = classify_sentence(s.span.slice(text), s.terminator == Some('?'));
            (s.span, kind)
        })
        .collect()
}

/// Question kind of a whole utterance: open-ended if any sentence is an
/// open-ended question, closed if any sentence is a closed question, and
/// not a question otherwise.
pub fn detect_question(text: &str) -> QuestionKind {
    let kinds: Vec<QuestionKind> = question_sentences(text).into_iter().map(|(_, k)| k).collect();
    if kinds.contains(&QuestionKind::OpenEnded) {
        QuestionKind::OpenEnded
    } else if kinds.contains(&QuestionKind::Closed) {
        QuestionKind::Closed
    } else {
        QuestionKind::NotAQuestion
    }
}
