//! Benchmark fixtures. The benches live in `benches/`.

use sic_core::dialogue::{DialogueEngine, DialogueState, MockProvider, ModuleKind, TraineeInput};
use sic_core::skill::{classify_utterance, RuleSet};

pub const UTTERANCES: &[&str] = &[
    "I'm so sorry. That must be really frightening to read.",
    "Stage four means the cancer has spread beyond the lung. It is not curable.",
    "Maybe we could possibly look at some options.",
    "What matters most to you as you think about the time ahead?",
    "Would it be okay if I shared some options that fit those goals?",
    "Let's talk about the treatment schedule.",
];

/// Every module played through with the utterances above, for report building.
pub fn ended_states(engine: &DialogueEngine, rules: &RuleSet) -> Vec<DialogueState> {
    ModuleKind::ALL
        .iter()
        .map(|&m| {
            let mut s = engine.start(m, 0, 0).unwrap();
            let mut clock = 0;
            for line in UTTERANCES.iter().cycle().take(40) {
                let input = TraineeInput::new(*line).timed(clock, clock + 5_000);
                clock += 9_000;
                let cls = classify_utterance(line, rules, None);
                s = engine.advance(&s, &input, &cls, &MockProvider).unwrap().state;
                if s.is_ended() {
                    break;
                }
            }
            s
        })
        .collect()
}
