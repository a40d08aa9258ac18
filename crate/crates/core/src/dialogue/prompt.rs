use std::fmt::Write;

use super::engine::DialogueState;
use super::provider::{ChatMessage, ChatRole, ProviderRequest, SUGGESTION_PREFIX};
use super::{DialogueConfig, PersonaFacts, MAX_INTENSITY};
use crate::transcript::Speaker;

pub const SYSTEM_PREAMBLE: &str = "You are playing a patient in a communication training exercise for clinicians. \
Stay in character at all times and speak as the patient described in the persona. \
Answer in one to three short spoken sentences. \
Only state medical facts that appear in the persona. \
Never coach the clinician or comment on the exercise.";

/// Provider request for the patient's next line.
///
/// The history window holds the most recent `config.history_window` turns.
/// A suggestion is placed verbatim on its own line in the instructions.
pub fn build_llm_prompt(
    state: &DialogueState,
    suggestion: Option<&str>,
    persona: &PersonaFacts,
    config: &DialogueConfig,
) -> ProviderRequest {
    let mut sys = String::from(SYSTEM_PREAMBLE);
    let _ = write!(sys, "\nTraining module: {}.", state.module);
    if state.emotion.is_neutral() {
        sys.push_str("\nCurrent emotion: neutral.");
    } else {
        let _ = write!(
            sys,
            "\nCurrent emotion: {} (intensity {} of {}).",
            state.emotion.base().as_str(),
            state.emotion.intensity(),
            MAX_INTENSITY
        );
    }
    if let Some(s) = suggestion {
        sys.push_str("\nSay the suggested reply below in your own words, keeping its meaning and tone.\n");
        sys.push_str(SUGGESTION_PREFIX);
        sys.push_str(&s.replace(['\r', '\n'], " "));
    }
    let messages = state
        .history
        .window(config.history_window)
        .iter()
        .map(|t| ChatMessage {
            role: match t.speaker {
                Speaker::Trainee => ChatRole::User,
                Speaker::Patient => ChatRole::Assistant,
            },
            content: t.text.clone(),
        })
        .collect();
    ProviderRequest { system_instructions: sys, persona: Some(persona.clone()), messages }
}
