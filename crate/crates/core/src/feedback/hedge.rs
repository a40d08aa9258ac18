use serde::Deserialize;

use crate::text::{self, Span};

pub const HEDGE_FORMAT: &str = "sic-hedges/1";

/// Word and phrase list of tentative qualifiers.
///
/// Matching works on lowercased surface words (no contraction expansion),
/// scanning left to right and taking the longest entry that starts at each
/// word, so matches never overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HedgeLexicon {
    version: u32,
    entries: Vec<String>,
    phrases: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HedgeLexiconError {
    #[error("hedge lexicon: {0}")]
    Toml(String),
    #[error("hedge lexicon format is {found:?}, expected {HEDGE_FORMAT:?}")]
    Format { found: String },
    #[error("hedge entry {0:?} has no words")]
    Empty(String),
    #[error("hedge entry {0:?} is listed twice")]
    Duplicate(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLexicon {
    format: String,
    version: u32,
    entries: Vec<String>,
}

impl HedgeLexicon {
    pub fn builtin() -> Self {
        Self::from_toml(include_str!("../../data/feedback/hedges.toml")).expect("builtin hedge lexicon is valid")
    }

    pub fn from_toml(src: &str) -> Result<Self, HedgeLexiconError> {
        let raw: RawLexicon = toml::from_str(src).map_err(|e| HedgeLexiconError::Toml(e.to_string()))?;
        if raw.format != HEDGE_FORMAT {
            return Err(HedgeLexiconError::Format { found: raw.format });
        }
        Self::new(raw.version, raw.entries)
    }

    pub fn new(version: u32, entries: Vec<String>) -> Result<Self, HedgeLexiconError> {
        let mut phrases: Vec<Vec<String>> = Vec::with_capacity(entries.len());
        for e in &entries {
            let p: Vec<String> = text::words(e).into_iter().map(|t| t.norm).collect();
            if p.is_empty() {
                return Err(HedgeLexiconError::Empty(e.clone()));
            }
            if phrases.contains(&p) {
                return Err(HedgeLexiconError::Duplicate(e.clone()));
            }
            phrases.push(p);
        }
        Ok(Self { version, entries, phrases })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Non-overlapping hedge matches in `text`, as byte spans.
pub fn count_hedge_words(text: &str, lexicon: &HedgeLexicon) -> (usize, Vec<Span>) {
    let toks = text::words(text);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let best = lexicon
            .phrases
            .iter()
            .filter(|p| {
                p.len() <= toks.len() - i && p.iter().zip(&toks[i..]).all(|(w, t)| *w == t.norm)
            })
            .map(Vec::len)
            .max();
        match best {
            Some(n) => {
                spans.push(Span::new(toks[i].start, toks[i + n - 1].end));
                i += n;
            }
            None => i += 1,
        }
    }
    (spans.len(), spans)
}
