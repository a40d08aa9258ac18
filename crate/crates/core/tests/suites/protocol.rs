//! Escalation, success and timeout rules checked against a reference count
//! kept from what each turn exposes, plus golden full-session transcripts.

use std::collections::BTreeSet;

use proptest::prelude::*;

use sic_core::dialogue::{
    ControlSignal, DialogueConfig, DialogueEngine, DialogueError, DialogueState, FailingProvider, LlmProvider,
    MockProvider, ModuleKind, PersonaFacts, Schema, TraineeInput, MAX_FAILURES,
};
use sic_core::skill::{SkillClassification, SkillLabel};

use super::common::{check_golden, run_prop, run_session, Check};

const CASES: u32 = 512;
const GOLDEN: &str = include_str!("../golden/session_transcripts.json");

fn labels_from_mask(mask: u8) -> SkillClassification {
    SkillClassification::from_model(SkillLabel::ALL.into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, l)| l))
}

fn module_strategy() -> impl Strategy<Value = ModuleKind> {
    prop_oneof![Just(ModuleKind::Empathize), Just(ModuleKind::Explicit), Just(ModuleKind::Empower)]
}

fn engine_with(config: DialogueConfig) -> DialogueEngine {
    DialogueEngine::new(Schema::builtin(), PersonaFacts::builtin(), config)
}

fn expected_skill(engine: &DialogueEngine, s: &DialogueState) -> Option<SkillLabel> {
    engine.schema().module(s.module).unwrap().node(&s.node).unwrap().expects
}

/// Terminates on exactly the turn that brings the reference failure count to three.
pub fn escalation_iff_three_failures() {
    let engine = engine_with(DialogueConfig { success_threshold: u32::MAX, ..DialogueConfig::default() });
    run_prop(CASES, (module_strategy(), prop::collection::vec(0u8..8, 1..40)), |(module, masks)| {
        let mut s = engine.start(module, 0, 0).unwrap();
        let mut failures = 0u8;
        for mask in masks {
            let cls = labels_from_mask(mask);
            let opportunity = !s.emotion.is_neutral();
            if opportunity && !cls.contains(SkillLabel::Empathize) {
                failures += 1;
            }
            let out = engine.advance(&s, &TraineeInput::new("turn"), &cls, &MockProvider).unwrap();
            prop_assert_eq!(out.state.failure_count, failures);
            prop_assert_eq!(out.signal == ControlSignal::EscalationTerminate, failures == MAX_FAILURES);
            s = out.state;
            if s.is_ended() {
                break;
            }
        }
        prop_assert!(failures <= MAX_FAILURES);
        Ok(())
    });
}

/// Ends with success on the turn of the second demonstration, unless
/// escalation ends it in the same turn.
pub fn success_at_two_demonstrations() {
    let engine = engine_with(DialogueConfig::default());
    run_prop(CASES, (module_strategy(), prop::collection::vec(0u8..8, 1..40)), |(module, masks)| {
        let mut s = engine.start(module, 0, 0).unwrap();
        let mut demos = 0u32;
        let mut failures = 0u8;
        for mask in masks {
            let cls = labels_from_mask(mask);
            if expected_skill(&engine, &s).is_some_and(|k| cls.contains(k)) {
                demos += 1;
            }
            if !s.emotion.is_neutral() && !cls.contains(SkillLabel::Empathize) {
                failures += 1;
            }
            let out = engine.advance(&s, &TraineeInput::new("turn"), &cls, &MockProvider).unwrap();
            prop_assert_eq!(out.state.demo_count, demos);
            let want = if failures >= MAX_FAILURES {
                ControlSignal::EscalationTerminate
            } else if demos >= 2 {
                ControlSignal::SuccessEnd
            } else {
                ControlSignal::Continue
            };
            prop_assert_eq!(out.signal, want);
            s = out.state;
            if s.is_ended() {
                break;
            }
        }
        Ok(())
    });
}

/// Times out on the first turn at or past the module cap, and on the
/// session cap when the session started earlier.
pub fn timeout_at_cap() {
    let config = DialogueConfig::default();
    let engine = engine_with(config.clone());
    let strategy = (
        prop_oneof![Just(ModuleKind::Explicit), Just(ModuleKind::Empower)],
        prop::collection::vec(1_000u64..90_000, 1..30),
        prop_oneof![Just(0u64), 1_500_000u64..1_800_000],
    );
    run_prop(CASES, strategy, |(module, gaps, session_offset)| {
        let t0 = 2_000_000u64;
        let mut s = engine.start(module, t0, t0 - session_offset).unwrap();
        // empathic-only turns: never a failure, never a demonstration here
        let cls = labels_from_mask(0b001);
        let mut t = t0;
        for gap in gaps {
            t += gap;
            let out = engine.advance(&s, &TraineeInput::new("turn").timed(t - 500, t), &cls, &MockProvider).unwrap();
            let over = t - t0 >= config.module_cap_ms || t - (t0 - session_offset) >= config.session_cap_ms;
            prop_assert_eq!(out.signal == ControlSignal::TimeoutEnd, over, "t {}", t - t0);
            prop_assert_eq!(out.state.failure_count, 0);
            s = out.state;
            if s.is_ended() {
                break;
            }
        }
        Ok(())
    });
}

/// Random walks stay on schema nodes, replies are never empty, endings use
/// the module's ending lines and ended states refuse further turns.
pub fn random_walk_stays_in_schema() {
    let engine = engine_with(DialogueConfig::default());
    let failing = FailingProvider { reason: "down".into() };
    let strategy = (module_strategy(), prop::collection::vec(0u8..8, 1..60), 0usize..4);
    run_prop(CASES, strategy, |(module, masks, fail_every)| {
        let m = engine.schema().module(module).unwrap();
        let endings: BTreeSet<&str> = [&m.endings.success, &m.endings.timeout, &m.endings.escalation]
            .iter()
            .map(|l| l.text.as_str())
            .collect();
        let mut s = engine.start(module, 0, 0).unwrap();
        for (i, mask) in masks.iter().enumerate() {
            let provider: &dyn LlmProvider = if fail_every > 0 && i % fail_every == 0 { &failing } else { &MockProvider };
            let before = s.history.len();
            let out = engine.advance(&s, &TraineeInput::new("turn"), &labels_from_mask(*mask), provider).unwrap();
            prop_assert!(m.node(&out.state.node).is_some());
            prop_assert!(!out.response.trim().is_empty());
            prop_assert_eq!(out.state.history.len(), before + 2);
            prop_assert_eq!(&out.state.history.turns()[..before], s.history.turns());
            if out.signal.is_end() {
                prop_assert!(endings.contains(out.response.as_str()));
                let again = engine.advance(&out.state, &TraineeInput::new("more"), &labels_from_mask(0), &MockProvider);
                prop_assert_eq!(again.unwrap_err(), DialogueError::Ended(out.signal));
                break;
            }
            s = out.state;
        }
        Ok(())
    });
}

pub fn golden_session_is_byte_identical() {
    let a = serde_json::to_string_pretty(&run_session()).unwrap();
    let b = serde_json::to_string_pretty(&run_session()).unwrap();
    assert_eq!(a, b, "two runs differ");
    check_golden("session_transcripts.json", GOLDEN, &a);
}

pub fn golden_session_outcomes() {
    let states = run_session();
    let signals: Vec<ControlSignal> = states.iter().map(|s| s.signal).collect();
    assert_eq!(signals, [ControlSignal::SuccessEnd, ControlSignal::SuccessEnd, ControlSignal::SuccessEnd]);
    let empathize = &states[0];
    assert_eq!(empathize.failure_count, 1);
    assert!(states.iter().all(|s| s.provider_fallbacks == 0));
}

#[allow(dead_code)]
pub const CHECKS: &[Check] = &[
    ("escalation_iff_three_failures", escalation_iff_three_failures),
    ("success_at_two_demonstrations", success_at_two_demonstrations),
    ("timeout_at_cap", timeout_at_cap),
    ("random_walk_stays_in_schema", random_walk_stays_in_schema),
    ("golden_session_is_byte_identical", golden_session_is_byte_identical),
    ("golden_session_outcomes", golden_session_outcomes),
];
