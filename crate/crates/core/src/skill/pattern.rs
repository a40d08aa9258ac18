//! Phrase-template patterns matched against normalized token streams.
//!
//! ```text
//! pattern  = seq
//! seq      = elem { " " elem }
//! elem     = word | "*" | "..." | "<num>" | "(" alts ")" | "[" alts "]"
//! alts     = seq { "|" seq }
//! word     = 1*( lowercase letter | digit | "'" )
//! ```
//!
//! `*` matches exactly one word, `...` skips zero to three words, `<num>`
//! matches a numeral or a number word, `( a | b c )` is alternation and
//! `[ x | y ]` is an optional alternation. Words are compared after the same lowercasing and
//! contraction expansion applied to utterances, so `can't` in a pattern is
//! equivalent to `can not`.

use std::fmt;

use crate::text::{self, Token};

const MAX_GAP: usize = 3;

const NUMBER_WORDS: &[&str] = &[
    "a", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "few", "couple", "several", "half",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Elem {
    Word(String),
    Any,
    Gap,
    Num,
    Alt(Vec<Vec<Elem>>),
    Opt(Vec<Elem>),
}

/// A compiled pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    source: String,
    seq: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid pattern {pattern:?}: {reason}")]
pub struct PatternError {
    pub pattern: String,
    pub reason: String,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

fn lex(src: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in src.char_indices() {
        if matches!(c, '(' | ')' | '[' | ']' | '|') || c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(&src[s..i]);
            }
            if !c.is_whitespace() {
                out.push(&src[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&src[s..]);
    }
    out
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn alternatives(&mut self, close: &str) -> Result<Vec<Vec<Elem>>, String> {
        let mut alts = vec![self.seq()?];
        loop {
            match self.peek() {
                Some("|") => {
                    self.pos += 1;
                    alts.push(self.seq()?);
                }
                Some(t) if t == close => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(format!("unclosed group, expected {close:?}")),
            }
        }
        if alts.iter().any(Vec::is_empty) {
            return Err("empty alternative".into());
        }
        Ok(alts)
    }

    fn seq(&mut self) -> Result<Vec<Elem>, String> {
        let mut seq = Vec::new();
        while let Some(t) = self.peek() {
            match t {
                ")" | "]" | "|" => break,
                "(" => {
                    self.pos += 1;
                    let alts = self.alternatives(")")?;
                    seq.push(Elem::Alt(alts));
                }
                "[" => {
                    self.pos += 1;
                    let mut alts = self.alternatives("]")?;
                    let inner = if alts.len() == 1 { alts.remove(0) } else { vec![Elem::Alt(alts)] };
                    seq.push(Elem::Opt(inner));
                }
                "*" => {
                    self.pos += 1;
                    seq.push(Elem::Any);
                }
                "..." => {
                    self.pos += 1;
                    seq.push(Elem::Gap);
                }
                "<num>" => {
                    self.pos += 1;
                    seq.push(Elem::Num);
                }
                word => {
                    self.pos += 1;
                    let valid = word.chars().all(|c| c.is_alphanumeric() || c == '\'' || c == '\u{2019}');
                    let toks = text::normalized(word);
                    if !valid || toks.is_empty() {
                        return Err(format!("bad word {word:?}"));
                    }
                    seq.extend(toks.into_iter().map(|t| Elem::Word(t.norm)));
                }
            }
        }
        Ok(seq)
    }
}

impl Pattern {
    pub fn parse(source: &str) -> Result<Self, PatternError> {
        let err = |reason: String| PatternError { pattern: source.to_string(), reason };
        let mut p = Parser { toks: lex(source), pos: 0 };
        let seq = p.seq().map_err(err)?;
        if p.pos != p.toks.len() {
            return Err(err(format!("unexpected {:?}", p.toks[p.pos])));
        }
        if seq.is_empty() {
            return Err(err("pattern is empty".into()));
        }
        if matches!(seq.first(), Some(Elem::Gap)) || matches!(seq.last(), Some(Elem::Gap)) {
            return Err(err("'...' cannot begin or end a pattern".into()));
        }
        Ok(Self { source: source.to_string(), seq })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// First match in `tokens`, as a half-open token index range.
    ///
    /// Leftmost start wins; at a given start the first successful path in
    /// pattern order is taken.
    pub fn find(&self, tokens: &[Token]) -> Option<(usize, usize)> {
        (0..tokens.len()).find_map(|i| {
            match_seq(&self.seq, tokens, i, &mut |end| Some(end)).map(|end| (i, end))
        })
    }

    /// Matches against raw text, returning the byte span of the match.
    pub fn find_in(&self, text: &str) -> Option<crate::text::Span> {
        let toks = text::normalized(text);
        self.find(&toks).map(|(a, b)| crate::text::Span::new(toks[a].start, toks[b - 1].end))
    }
}

fn is_number(word: &str) -> bool {
    NUMBER_WORDS.contains(&word) || word.chars().all(|c| c.is_ascii_digit())
}

fn match_seq(
    seq: &[Elem],
    toks: &[Token],
    pos: usize,
    k: &mut dyn FnMut(usize) -> Option<usize>,
) -> Option<usize> {
    let Some((first, rest)) = seq.split_first() else {
        return k(pos);
    };
    match first {
        Elem::Word(w) => match toks.get(pos) {
            Some(t) if &t.norm == w => match_seq(rest, toks, pos + 1, k),
            _ => None,
        },
        Elem::Any => {
            if pos < toks.len() {
                match_seq(rest, toks, pos + 1, k)
            } else {
                None
            }
        }
        Elem::Num => match toks.get(pos) {
            Some(t) if is_number(&t.norm) => match_seq(rest, toks, pos + 1, k),
            _ => None,
        },
        Elem::Gap => (0..=MAX_GAP)
            .take_while(|g| pos + g <= toks.len())
            .find_map(|g| match_seq(rest, toks, pos + g, k)),
        Elem::Alt(alts) => alts.iter().find_map(|alt| {
            match_seq(alt, toks, pos, &mut |p| match_seq(rest, toks, p, k))
        }),
        Elem::Opt(inner) => match_seq(inner, toks, pos, &mut |p| match_seq(rest, toks, p, k))
            .or_else(|| match_seq(rest, toks, pos, k)),
    }
}
