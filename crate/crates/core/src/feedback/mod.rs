//! Post-module feedback: metrics, did-well and missed-opportunity panels,
//! the suggestion prompt and report rendering.

mod bank;
mod hedge;
mod metrics;
mod prompt;
mod render;

use serde::{Deserialize, Serialize};

use crate::dialogue::{ControlSignal, DialogueState, EmotionTag, ModuleKind, ProviderError, ProviderRequest};
use crate::skill::SkillLabel;
use crate::transcript::{Speaker, Transcript};

pub use bank::{BankError, ExampleStatements, FewShotBank, FewShotExample};
pub use hedge::{count_hedge_words, HedgeLexicon, HedgeLexiconError, HEDGE_FORMAT};
pub use metrics::{
    compute_metrics, flesch_kincaid, hedge_instances, question_metrics, readability_counts, reading_level,
    speaking_rate, transcript_reading_level, turn_taking, HedgeInstance, Metric, MetricError, MetricSet,
    ReadabilityCounts, TurnTaking,
};
pub use prompt::{build_suggestion_prompt, NO_MISSED_MARKER};
pub use render::{from_json, render_html, to_json, HIGHLIGHT_ATTR};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DidWell {
    pub skill: SkillLabel,
    pub turn: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opportunity {
    pub skill: SkillLabel,
    /// Patient turn that invited the skill.
    pub patient_turn: usize,
    /// The trainee reply that missed it; `None` when the module ended first.
    pub trainee_turn: Option<usize>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Suggestion {
    Pending,
    Ready { text: String },
    Unavailable { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightedTurn {
    pub index: usize,
    pub speaker: Speaker,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<SkillLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<EmotionTag>,
    /// Trainee turn that demonstrated at least one skill.
    pub highlight: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub module: ModuleKind,
    pub signal: ControlSignal,
    pub did_well: Vec<DidWell>,
    pub opportunities: Vec<Opportunity>,
    pub metrics: MetricSet,
    pub suggestion: Suggestion,
    pub transcript: Vec<HighlightedTurn>,
    /// Example statements for the module's skill.
    pub examples: Vec<String>,
}

impl FeedbackReport {
    pub fn highlight_count(&self) -> usize {
        self.transcript.iter().filter(|t| t.highlight).count()
    }

    /// Stores the provider outcome for the suggestion, verbatim.
    pub fn set_suggestion(&mut self, result: Result<String, ProviderError>) {
        self.suggestion = match result {
            Ok(text) => Suggestion::Ready { text },
            Err(e) => Suggestion::Unavailable { reason: e.to_string() },
        };
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeedbackError {
    #[error("module has not ended")]
    SessionNotEnded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackConfig {
    /// Trainee word share above which speaking is flagged as excessive.
    pub excessive_share: f64,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self { excessive_share: 0.75 }
    }
}

pub fn opportunity_explanation(skill: SkillLabel) -> &'static str {
    match skill {
        SkillLabel::Empathize => {
            "The patient showed emotion here. Naming or validating the feeling would have addressed it."
        }
        SkillLabel::Explicit => {
            "The patient asked for information here. A plain statement of the facts, with a time frame where relevant, was needed."
        }
        SkillLabel::Empower => {
            "The patient raised a decision here. Asking about her understanding, values or preferences would have helped."
        }
    }
}

/// Did-well items for every skill label on a trainee turn.
pub fn did_well(transcript: &Transcript) -> Vec<DidWell> {
    transcript
        .trainee_turns()
        .flat_map(|(i, t)| t.labels.iter().map(move |&skill| DidWell { skill, turn: i, text: t.text.clone() }))
        .collect()
}

/// Patient turns inviting a skill that the next trainee turn lacks. A patient
/// turn with no trainee turn after it counts as missed.
pub fn missed_opportunities(transcript: &Transcript) -> Vec<Opportunity> {
    let turns = transcript.turns();
    let mut out = Vec::new();
    for (i, t) in turns.iter().enumerate() {
        let Some(skill) = t.expects.filter(|_| t.speaker == Speaker::Patient) else {
            continue;
        };
        let reply = turns.iter().enumerate().skip(i + 1).find(|(_, r)| r.is_trainee());
        if reply.is_some_and(|(_, r)| r.labels.contains(&skill)) {
            continue;
        }
        out.push(Opportunity {
            skill,
            patient_turn: i,
            trainee_turn: reply.map(|(j, _)| j),
            explanation: opportunity_explanation(skill).to_string(),
        });
    }
    out
}

pub fn highlighted_transcript(transcript: &Transcript) -> Vec<HighlightedTurn> {
    transcript
        .turns()
        .iter()
        .enumerate()
        .map(|(index, t)| HighlightedTurn {
            index,
            speaker: t.speaker,
            text: t.text.clone(),
            labels: t.labels.iter().copied().collect(),
            emotion: t.emotion,
            highlight: t.is_trainee() && !t.labels.is_empty(),
        })
        .collect()
}

/// Shipped lexicon, examples and instructions bundled for report building.
#[derive(Debug, Clone)]
pub struct FeedbackEngine {
    pub hedges: HedgeLexicon,
    pub few_shot: FewShotBank,
    pub statements: ExampleStatements,
    pub context: String,
    pub config: FeedbackConfig,
}

pub const DEFAULT_CONTEXT: &str = include_str!("../../data/feedback/context.txt");

impl FeedbackEngine {
    pub fn builtin() -> Self {
        Self {
            hedges: HedgeLexicon::builtin(),
            few_shot: FewShotBank::builtin(),
            statements: ExampleStatements::builtin(),
            context: DEFAULT_CONTEXT.to_string(),
            config: FeedbackConfig::default(),
        }
    }

    /// Report for an ended module. The suggestion starts out pending.
    pub fn compile(&self, state: &DialogueState) -> Result<FeedbackReport, FeedbackError> {
        if !state.signal.is_end() {
            return Err(FeedbackError::SessionNotEnded);
        }
        let history = &state.history;
        Ok(FeedbackReport {
            module: state.module,
            signal: state.signal,
            did_well: did_well(history),
            opportunities: missed_opportunities(history),
            metrics: compute_metrics(history, &self.hedges, self.config.excessive_share),
            suggestion: Suggestion::Pending,
            transcript: highlighted_transcript(history),
            examples: self.statements.for_skill(state.module.skill()).to_vec(),
        })
    }

    pub fn suggestion_request(&self, report: &FeedbackReport) -> ProviderRequest {
        build_suggestion_prompt(report, &self.few_shot, &self.context)
    }
}

/// [`FeedbackEngine::compile`] with the shipped data.
pub fn compile_feedback(state: &DialogueState) -> Result<FeedbackReport, FeedbackError> {
    FeedbackEngine::builtin().compile(state)
}
