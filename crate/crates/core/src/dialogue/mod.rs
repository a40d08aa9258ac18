//! Schema-guided patient dialogue with an LLM fallback.
//!
//! The engine is synchronous and never reads a clock: elapsed time comes from
//! the timestamps callers attach to turns. A turn is processed in two steps so
//! that async callers can own the provider call:
//!
//! 1. [`DialogueEngine::plan`] applies the escalation and progress rules and
//!    says whether a provider call is wanted;
//! 2. [`DialogueEngine::finish`] folds the provider result (or its absence)
//!    into the final reply.
//!
//! [`DialogueEngine::advance`] does both with a blocking [`LlmProvider`].

mod emotion;
mod engine;
mod prompt;
mod provider;
mod schema;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::skill::SkillLabel;

pub use emotion::{BaseEmotion, EmotionTag, MAX_INTENSITY};
pub use engine::{
    escalate_emotion, module_progress, DialogueEngine, DialogueState, PlannedReply, ResponseSource,
    TraineeInput, TurnOutcome, TurnPlan,
};
pub use prompt::{build_llm_prompt, SYSTEM_PREAMBLE};
pub use provider::{
    ChatMessage, ChatRole, FailingProvider, LlmProvider, MockProvider, ProviderError, ProviderRequest,
    ProviderResponse,
};
pub use schema::{Condition, Endings, ModuleSchema, PatientLine, Schema, SchemaError, SchemaNode, Transition};

/// Training module; each one targets a single skill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Empathize,
    Explicit,
    Empower,
}

impl ModuleKind {
    /// Default session order.
    pub const ALL: [ModuleKind; 3] = [ModuleKind::Empathize, ModuleKind::Explicit, ModuleKind::Empower];

    pub fn skill(self) -> SkillLabel {
        match self {
            ModuleKind::Empathize => SkillLabel::Empathize,
            ModuleKind::Explicit => SkillLabel::Explicit,
            ModuleKind::Empower => SkillLabel::Empower,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.skill().as_str()
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModuleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "empathize" => Ok(ModuleKind::Empathize),
            "explicit" => Ok(ModuleKind::Explicit),
            "empower" => Ok(ModuleKind::Empower),
            other => Err(format!("unknown module {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlSignal {
    Continue,
    SuccessEnd,
    TimeoutEnd,
    EscalationTerminate,
}

impl ControlSignal {
    pub fn is_end(self) -> bool {
        self != ControlSignal::Continue
    }
}

/// Case facts the provider must stay consistent with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaFacts {
    pub name: String,
    pub age: u32,
    pub sex: String,
    pub diagnosis: String,
    pub prognosis_without_treatment: String,
    pub prognosis_with_treatment: String,
    #[serde(default)]
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PersonaError {
    #[error("persona file: {0}")]
    Toml(String),
    #[error("persona field {0:?} is empty")]
    Empty(&'static str),
}

impl PersonaFacts {
    pub fn builtin() -> Self {
        Self::from_toml(include_str!("../../data/persona/patient.toml")).expect("builtin persona is valid")
    }

    pub fn from_toml(src: &str) -> Result<Self, PersonaError> {
        let p: PersonaFacts = toml::from_str(src).map_err(|e| PersonaError::Toml(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PersonaError> {
        let fields = [
            ("name", &self.name),
            ("sex", &self.sex),
            ("diagnosis", &self.diagnosis),
            ("prognosis_without_treatment", &self.prognosis_without_treatment),
            ("prognosis_with_treatment", &self.prognosis_with_treatment),
        ];
        for (name, value) in fields {
            if value.trim().is_empty() {
                return Err(PersonaError::Empty(name));
            }
        }
        if self.age == 0 {
            return Err(PersonaError::Empty("age"));
        }
        if self.details.iter().any(|d| d.trim().is_empty()) {
            return Err(PersonaError::Empty("details"));
        }
        Ok(())
    }
}

/// Unaddressed emotional cues that end a module.
pub const MAX_FAILURES: u8 = 3;

/// Engine thresholds. Times are milliseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DialogueConfig {
    /// Demonstrations of the module skill that end a module early.
    pub success_threshold: u32,
    pub module_cap_ms: u64,
    pub session_cap_ms: u64,
    /// Turns of history sent to the provider.
    pub history_window: usize,
    /// Ask the provider to rephrase schema lines instead of using them verbatim.
    pub paraphrase: bool,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        Self {
            success_threshold: 2,
            module_cap_ms: 5 * 60 * 1000,
            session_cap_ms: 30 * 60 * 1000,
            history_window: 12,
            paraphrase: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DialogueError {
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error("module already ended with {0:?}")]
    Ended(ControlSignal),
    #[error("schema has no {0} module")]
    UnknownModule(ModuleKind),
    #[error("state points at unknown node {0:?}")]
    UnknownNode(String),
}
