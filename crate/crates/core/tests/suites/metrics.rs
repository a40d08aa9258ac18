//! Feedback metrics against independent counts: a character-scan hedge
//! matcher, hand-counted readability fixtures and fuzzed transcripts.

use proptest::prelude::*;

use sic_core::dialogue::{BaseEmotion, EmotionTag};
use sic_core::feedback::{
    compute_metrics, count_hedge_words, flesch_kincaid, readability_counts, reading_level, speaking_rate,
    transcript_reading_level, HedgeLexicon, Metric, MetricError, ReadabilityCounts,
};
use sic_core::transcript::{Transcript, Turn};

use super::common::{run_prop, Check};

const CASES: u32 = 1000;

/// Lowercases, maps every separator to one space and pads both ends, so a
/// phrase match is a plain substring search on " phrase ".
fn canonical(text: &str) -> String {
    let mut out = String::from(" ");
    for c in text.chars() {
        let c = if c == '\u{2019}' { '\'' } else { c };
        if c.is_alphanumeric() || c == '\'' {
            out.extend(c.to_lowercase());
        } else if !out.ends_with(' ') {
            out.push(' ');
        }
    }
    if !out.ends_with(' ') {
        out.push(' ');
    }
    out
}

/// Leftmost-longest, non-overlapping matches by scanning word starts.
fn oracle_hedges(text: &str, entries: &[String]) -> Vec<String> {
    let s = canonical(text);
    let mut found = Vec::new();
    let mut pos = 0;
    while pos + 1 < s.len() {
        let rest = &s[pos..];
        let hit = entries
            .iter()
            .filter(|e| rest.starts_with(&format!(" {e} ")))
            .max_by_key(|e| e.len());
        match hit {
            Some(e) => {
                found.push(e.clone());
                pos += e.len() + 1;
            }
            None => pos += 1 + rest[1..].find(' ').unwrap(),
        }
    }
    found
}

const FILLER: &[&str] = &[
    "the", "scan", "shows", "cancer", "has", "spread", "we", "talk", "treatment", "you", "your", "family", "time",
    "months", "don't", "think", "feel", "like", "bit", "little", "kind", "sort", "of", "a", "i", "it", "seems",
];

fn word_strategy(lexicon: Vec<String>) -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(FILLER.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
        prop::sample::select(lexicon),
    ]
}

fn shout(word: String, upper: bool) -> String {
    if upper {
        word.to_uppercase()
    } else {
        word
    }
}

fn text_strategy() -> impl Strategy<Value = String> {
    let lex = HedgeLexicon::builtin().entries().to_vec();
    let sep = prop::sample::select(vec![" ", "  ", ", ", ". ", "? ", "! ", " - ", "\t", "; "]);
    prop::collection::vec((word_strategy(lex), any::<bool>(), sep, any::<bool>()), 0..30).prop_map(|parts| {
        let mut s = String::new();
        for (w, upper, sep, curly) in parts {
            let w = if curly { w.replace('\'', "\u{2019}") } else { w };
            s.push_str(&shout(w, upper && s.len() % 3 == 0));
            s.push_str(sep);
        }
        s
    })
}

pub fn hedge_count_matches_char_scan() {
    let lex = HedgeLexicon::builtin();
    run_prop(CASES, text_strategy(), |text| {
        let (n, spans) = count_hedge_words(&text, &lex);
        let want = oracle_hedges(&text, lex.entries());
        prop_assert_eq!(n, want.len());
        prop_assert_eq!(spans.len(), n);
        let got: Vec<String> = spans.iter().map(|s| canonical(s.slice(&text)).trim().to_string()).collect();
        prop_assert_eq!(got, want);
        for w in spans.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        Ok(())
    });
}

pub fn fuzzed_transcript_metrics_are_sane() {
    let strategy = prop::collection::vec((text_strategy(), any::<bool>(), 0u64..20_000), 0..12);
    run_prop(CASES, strategy, |turns| {
        let mut t = Transcript::new();
        let mut clock = 0;
        let mut trainee_words = 0;
        for (text, trainee, dur) in &turns {
            let turn = if *trainee {
                trainee_words += sic_core::text::word_count(text);
                Turn::trainee(text.clone()).timed(clock, clock + dur + 1)
            } else {
                Turn::patient(text.clone(), EmotionTag::NEUTRAL)
            };
            clock += dur + 1;
            t.push(turn);
        }
        let m = compute_metrics(&t, &HedgeLexicon::builtin(), 0.75);
        prop_assert!(m.open_ended_count <= m.questions_total);
        prop_assert_eq!(m.hedge_count, m.hedges.len());
        prop_assert!((0.0..=1.0).contains(&m.trainee_word_share));
        prop_assert!(m.longest_monologue <= trainee_words);
        prop_assert_eq!(m.excessive_speaking, m.trainee_word_share > 0.75);
        if let Metric::Value { value } = m.reading_level {
            prop_assert!(value >= 0.0 && value.is_finite());
        }
        match m.speaking_rate {
            Metric::Value { value } => prop_assert!(value >= 0.0 && value.is_finite()),
            Metric::Omitted { .. } => prop_assert!(false, "all trainee turns are timed"),
        }
        Ok(())
    });
}

fn fk(words: f64, sentences: f64, syllables: f64) -> f64 {
    (0.39 * words / sentences + 11.8 * syllables / words - 15.59).max(0.0)
}

pub fn readability_hand_counts() {
    // treat-ment op-tions re-main a-vail-a-ble / ra-di-a-tion could help con-sid-er-a-bly
    let text = "Treatment options remain available. Radiation could help considerably.";
    assert_eq!(readability_counts(text), ReadabilityCounts { words: 8, sentences: 2, syllables: 20 });
    assert!((reading_level(text).unwrap() - fk(8.0, 2.0, 20.0)).abs() < 1e-12);
    assert!((reading_level(text).unwrap() - 15.47).abs() < 1e-9);

    // "2.5" is one sentence and two digit words of one syllable each; "cm" has no vowel
    let text = "The scan showed 2.5 cm growth.";
    assert_eq!(readability_counts(text), ReadabilityCounts { words: 7, sentences: 1, syllables: 8 });
    assert!((reading_level(text).unwrap() - fk(7.0, 1.0, 8.0)).abs() < 1e-12);

    // simple speech floors at grade zero
    assert_eq!(reading_level("The cat sat on the mat."), Ok(0.0));
    // no terminator still counts as one sentence
    assert_eq!(readability_counts("we can talk").sentences, 1);
    assert_eq!(reading_level(""), Err(MetricError::EmptyText));
    assert_eq!(flesch_kincaid(ReadabilityCounts { words: 3, sentences: 0, syllables: 3 }), Err(MetricError::EmptyText));
}

pub fn transcript_readability_aggregates_counts() {
    let mut t = Transcript::new();
    t.push(Turn::trainee("Treatment options remain available"));
    t.push(Turn::patient("What now?", EmotionTag::NEUTRAL));
    t.push(Turn::trainee("Radiation could help considerably."));
    // the patient turn is ignored and the unpunctuated turn still closes a sentence
    assert!((transcript_reading_level(&t).unwrap() - fk(8.0, 2.0, 20.0)).abs() < 1e-12);
}

pub fn speaking_rate_fixtures() {
    let mut t = Transcript::new();
    t.push(Turn::trainee("one two three four five six").timed(0, 3_000));
    t.push(Turn::patient("Okay.", EmotionTag::new(BaseEmotion::Sad, 2).unwrap()));
    t.push(Turn::trainee("seven eight nine").timed(10_000, 13_000));
    // 9 words over 6 s of trainee speech
    assert!((speaking_rate(&t).unwrap() - 90.0).abs() < 1e-12);

    t.push(Turn::trainee("untimed"));
    assert_eq!(speaking_rate(&t), Err(MetricError::MissingTimestamps));
    assert_eq!(speaking_rate(&Transcript::new()), Ok(0.0));
}

#[allow(dead_code)]
pub const CHECKS: &[Check] = &[
    ("hedge_count_matches_char_scan", hedge_count_matches_char_scan),
    ("fuzzed_transcript_metrics_are_sane", fuzzed_transcript_metrics_are_sane),
    ("readability_hand_counts", readability_hand_counts),
    ("transcript_readability_aggregates_counts", transcript_readability_aggregates_counts),
    ("speaking_rate_fixtures", speaking_rate_fixtures),
];
