//! Tokenization shared by the classifier and the metric calculators.
//!
//! Two token streams exist:
//!
//! * [`words`] yields surface words: maximal runs of alphanumeric characters,
//!   with an apostrophe kept only when it sits between two alphanumerics
//!   (`can't`, `patient's`). Curly apostrophes are folded to `'`. Each word
//!   carries its byte span in the original text and a lowercased form.
//! * [`normalized`] additionally expands English contractions (`can't` to
//!   `can not`, `it's` to `it is`). Expanded pieces share the span of the
//!   contraction they came from.
//!
//! Sentences are split on runs of `.`, `!` and `?`; a period between two
//! digits does not end a sentence.

use serde::{Deserialize, Serialize};

/// A word with its location in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercased form with apostrophes folded to ASCII.
    pub norm: String,
    /// Byte offset of the first character.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
}

/// Byte span inside a piece of text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Surface words of `text`, in order.
pub fn words(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if !c.is_alphanumeric() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if is_apostrophe(c) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        let norm: String = text[start..end]
            .chars()
            .map(|c| if is_apostrophe(c) { '\'' } else { c })
            .flat_map(char::to_lowercase)
            .collect();
        out.push(Token { norm, start, end });
        i = j;
    }
    out
}

/// Number of surface words in `text`.
pub fn word_count(text: &str) -> usize {
    words(text).len()
}

const IS_HOSTS: &[&str] = &[
    "it", "that", "what", "there", "here", "who", "he", "she", "where", "how", "when", "this",
    "everything", "nothing", "something", "why",
];

fn expand(word: &str) -> Option<Vec<&'static str>> {
    let whole: &[&'static str] = match word {
        "can't" | "cannot" => &["can", "not"],
        "won't" => &["will", "not"],
        "shan't" => &["shall", "not"],
        "ain't" => &["is", "not"],
        "let's" => &["let", "us"],
        "y'all" => &["you", "all"],
        _ => &[],
    };
    if !whole.is_empty() {
        return Some(whole.to_vec());
    }
    None
}

/// Lowercased, contraction-expanded tokens of `text`.
pub fn normalized(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for tok in words(text) {
        let w = tok.norm.as_str();
        let push = |out: &mut Vec<Token>, s: &str| {
            out.push(Token { norm: s.to_string(), start: tok.start, end: tok.end });
        };
        if let Some(parts) = expand(w) {
            for p in parts {
                push(&mut out, p);
            }
            continue;
        }
        if let Some(stem) = w.strip_suffix("n't") {
            push(&mut out, stem);
            push(&mut out, "not");
            continue;
        }
        let suffixes: [(&str, &str); 5] =
            [("'re", "are"), ("'m", "am"), ("'ve", "have"), ("'ll", "will"), ("'d", "would")];
        if let Some((stem, full)) = suffixes
            .iter()
            .find_map(|(suf, full)| w.strip_suffix(suf).map(|stem| (stem, *full)))
        {
            if !stem.is_empty() {
                push(&mut out, stem);
                push(&mut out, full);
                continue;
            }
        }
        if let Some(stem) = w.strip_suffix("'s") {
            if IS_HOSTS.contains(&stem) {
                push(&mut out, stem);
                push(&mut out, "is");
                continue;
            }
        }
        out.push(tok);
    }
    out
}

/// A sentence with the punctuation that closed it, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub span: Span,
    pub terminator: Option<char>,
}

/// Splits `text` into sentences containing at least one word.
pub fn sentences(text: &str) -> Vec<Sentence> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    let is_term = |b: u8| b == b'.' || b == b'!' || b == b'?';
    while i < bytes.len() {
        let b = bytes[i];
        let decimal = b == b'.'
            && i > 0
            && bytes[i - 1].is_ascii_digit()
            && bytes.get(i + 1).is_some_and(u8::is_ascii_digit);
        if is_term(b) && !decimal {
            let mut j = i;
            let mut last = b;
            while j < bytes.len() && is_term(bytes[j]) {
                last = bytes[j];
                j += 1;
            }
            // a '?' anywhere in the run marks a question ("?!", "...?")
            let term = if bytes[i..j].contains(&b'?') { '?' } else { last as char };
            push_sentence(&mut out, text, start, i, Some(term));
            start = j;
            i = j;
        } else {
            i += 1;
        }
    }
    push_sentence(&mut out, text, start, text.len(), None);
    out
}

fn push_sentence(out: &mut Vec<Sentence>, text: &str, start: usize, end: usize, term: Option<char>) {
    let body = &text[start..end];
    if word_count(body) == 0 {
        return;
    }
    let lead = body.len() - body.trim_start().len();
    let trail = body.len() - body.trim_end().len();
    out.push(Sentence { span: Span::new(start + lead, end - trail), terminator: term });
}

/// Syllable estimate for a single word.
///
/// Frozen heuristic:
/// 1. keep ASCII letters only, lowercased; a word with no letters counts 1;
/// 2. count maximal groups of the vowels `a e i o u y`;
/// 3. subtract one for a final silent `e` when the count exceeds one, unless
///    the word ends in consonant + `le` (`table`);
/// 4. never return less than 1.
pub fn syllables(word: &str) -> usize {
    let letters: Vec<u8> = word
        .bytes()
        .filter(u8::is_ascii_alphabetic)
        .map(|b| b.to_ascii_lowercase())
        .collect();
    if letters.is_empty() {
        return 1;
    }
    let vowel = |b: u8| matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y');
    let mut groups = 0;
    let mut prev = false;
    for &b in &letters {
        let v = vowel(b);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = letters.len();
    if groups > 1 && letters[n - 1] == b'e' {
        let consonant_le = n >= 3 && letters[n - 2] == b'l' && !vowel(letters[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// Collapses runs of whitespace to one space and trims the ends.
pub fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
