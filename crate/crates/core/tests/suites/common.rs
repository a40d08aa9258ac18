//! Helpers shared by the suites: the scripted three-module session, golden
//! file comparison and a proptest runner usable outside the macro.

#![allow(dead_code)]

use std::path::PathBuf;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use sic_core::dialogue::{DialogueEngine, DialogueState, MockProvider, ModuleKind, TraineeInput};
use sic_core::skill::{classify_utterance, RuleSet};

pub type Check = (&'static str, fn());

pub const SCRIPT: &[(ModuleKind, &[&str])] = &[
    (
        ModuleKind::Empathize,
        &[
            "I'm so sorry. That must be really frightening to read.",
            "Let's talk about the treatment schedule.",
            "It makes sense that you'd be worried about your family.",
        ],
    ),
    (
        ModuleKind::Explicit,
        &[
            "Stage four means the cancer has spread beyond the lung. It is not curable.",
            "Maybe we could possibly look at some options.",
            "The treatment cannot cure the cancer. It may slow it down for a while.",
        ],
    ),
    (
        ModuleKind::Empower,
        &[
            "What matters most to you as you think about the time ahead?",
            "Tell me more about what a good day looks like for you.",
            "Would it be okay if I shared some options that fit those goals?",
        ],
    ),
];

/// Runs the three modules back to back with the rule classifier and the
/// mock provider, returning every module's final state.
pub fn run_session() -> Vec<DialogueState> {
    let engine = DialogueEngine::builtin();
    let rules = RuleSet::builtin();
    let session_start = 0;
    let mut clock = 0;
    let mut states = Vec::new();
    for (module, lines) in SCRIPT {
        let mut s = engine.start(*module, clock, session_start).unwrap();
        for line in lines.iter() {
            clock += 4_000;
            let start = clock;
            clock += 6_000;
            let cls = classify_utterance(line, &rules, None);
            let out = engine.advance(&s, &TraineeInput::new(*line).timed(start, clock), &cls, &MockProvider).unwrap();
            s = out.state;
            if s.is_ended() {
                break;
            }
        }
        clock += 1_000;
        states.push(s);
    }
    states
}

/// Compares `actual` with a golden file's contents. With UPDATE_GOLDEN set,
/// a run from the core crate rewrites the file instead.
pub fn check_golden(name: &str, want: &str, actual: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() && env!("CARGO_PKG_NAME") == "sic-core" {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
        std::fs::write(&path, actual).unwrap();
        return;
    }
    assert_eq!(actual, want, "{name} differs from golden file; rerun with UPDATE_GOLDEN=1 if intended");
}

/// Runs a property over `cases` generated inputs, panicking on the shrunk
/// counterexample.
pub fn run_prop<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    if let Err(e) = runner.run(&strategy, test) {
        panic!("{e}");
    }
}
