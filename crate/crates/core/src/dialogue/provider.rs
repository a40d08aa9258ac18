use serde::{Deserialize, Serialize};

use super::emotion::BaseEmotion;
use super::PersonaFacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    /// The trainee, speaking to the simulated patient.
    User,
    /// The simulated patient.
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

/// Provider-neutral chat request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub system_instructions: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona: Option<PersonaFacts>,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion_hint: Option<BaseEmotion>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum ProviderError {
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("provider timed out")]
    Timeout,
    #[error("provider returned an unusable response: {0}")]
    InvalidResponse(String),
}

/// Blocking chat completion.
pub trait LlmProvider {
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError>;
}

impl<P: LlmProvider + ?Sized> LlmProvider for &P {
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        (**self).complete(request)
    }
}

/// Marker line that carries a schema suggestion inside the instructions.
pub(crate) const SUGGESTION_PREFIX: &str = "Suggested reply: ";

const PATIENT_REPLIES: &[&str] = &[
    "I'm sorry, I can't really think about anything except the scan right now.",
    "Maybe. Honestly my mind keeps going back to what the report said.",
    "I don't know. Can we talk about what's happening with me?",
];

const COACHING_REPLIES: &[&str] = &[
    "Try pausing after difficult news and naming the emotion you notice, for example: \"I can see this is a lot to take in.\"",
    "State the prognosis in plain words with a time range, then check what the patient understood.",
    "Ask what matters most to the patient before laying out treatment choices, and invite her questions.",
];

/// Deterministic provider for tests and offline runs.
///
/// A request whose instructions carry a suggestion line is answered with the
/// suggestion verbatim. Other patient requests get one of a few canned lines,
/// and requests without a persona (feedback suggestions) get a canned coaching
/// tip. The choice is a hash of the request, so equal requests give equal
/// replies in every process.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl LlmProvider for MockProvider {
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        if let Some(s) = request
            .system_instructions
            .lines()
            .find_map(|l| l.strip_prefix(SUGGESTION_PREFIX))
        {
            return Ok(ProviderResponse { text: s.to_string(), emotion_hint: None });
        }
        let key = serde_json::to_vec(request).expect("request serializes");
        let bank = if request.persona.is_some() { PATIENT_REPLIES } else { COACHING_REPLIES };
        let text = bank[(fnv1a(&key) % bank.len() as u64) as usize];
        Ok(ProviderResponse { text: text.to_string(), emotion_hint: None })
    }
}

/// Provider that is always down.
#[derive(Debug, Clone, Default)]
pub struct FailingProvider {
    pub reason: String,
}

impl LlmProvider for FailingProvider {
    fn complete(&self, _request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        Err(ProviderError::Unavailable(if self.reason.is_empty() {
            "injected failure".into()
        } else {
            self.reason.clone()
        }))
    }
}
