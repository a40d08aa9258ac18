use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::emotion::EmotionTag;
use super::prompt::build_llm_prompt;
use super::provider::{LlmProvider, ProviderError, ProviderRequest, ProviderResponse};
use super::schema::{ModuleSchema, PatientLine, Schema, SchemaNode};
use super::{ControlSignal, DialogueConfig, DialogueError, ModuleKind, PersonaFacts, MAX_FAILURES};
use crate::skill::{SkillClassification, SkillLabel};
use crate::transcript::{Transcript, Turn};

/// Per-module conversation state. Cloned and replaced on every turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueState {
    pub module: ModuleKind,
    pub node: String,
    /// Emotion shown in the last patient line.
    pub emotion: EmotionTag,
    pub failure_count: u8,
    pub demo_count: u32,
    pub session_start_ms: u64,
    pub module_start_ms: u64,
    /// Latest timestamp seen. Never moves backwards.
    pub clock_ms: u64,
    /// Lines spoken per node, used for round-robin template selection.
    pub visits: BTreeMap<String, u32>,
    pub history: Transcript,
    pub signal: ControlSignal,
    /// Turns answered from the schema because the provider failed.
    pub provider_fallbacks: u32,
}

impl DialogueState {
    pub fn elapsed_ms(&self) -> u64 {
        self.clock_ms.saturating_sub(self.module_start_ms)
    }

    pub fn session_elapsed_ms(&self) -> u64 {
        self.clock_ms.saturating_sub(self.session_start_ms)
    }

    pub fn is_ended(&self) -> bool {
        self.signal.is_end()
    }
}

/// A trainee utterance with optional caller timestamps (ms from session start).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraineeInput {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_ms: Option<u64>,
}

impl TraineeInput {
    pub fn new(text: impl Into<String>) -> Self {
        Self { text: text.into(), start_ms: None, end_ms: None }
    }

    pub fn timed(mut self, start_ms: u64, end_ms: u64) -> Self {
        self.start_ms = Some(start_ms);
        self.end_ms = Some(end_ms);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseSource {
    /// Schema line used verbatim.
    Schema,
    /// Schema line rephrased by the provider.
    Paraphrased,
    /// Out-of-domain turn answered by the provider.
    LlmDirect,
    /// Provider failed; a schema line was used instead.
    SchemaFallback,
    /// Module ending line.
    Ending,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlannedReply {
    /// A schema line, possibly to be rephrased.
    Template { line: PatientLine, emotion: EmotionTag },
    /// A module ending line.
    Ending { line: PatientLine },
    /// The provider answers; `fallback_node` supplies a line if it cannot.
    Direct { emotion: EmotionTag, fallback_node: String },
}

/// Result of the rule step of a turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnPlan {
    /// State with the trainee turn recorded but no patient reply yet.
    pub state: DialogueState,
    pub signal: ControlSignal,
    pub reply: PlannedReply,
    /// Provider call wanted for this turn, if any.
    pub request: Option<ProviderRequest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnOutcome {
    pub state: DialogueState,
    pub response: String,
    pub emotion: EmotionTag,
    pub signal: ControlSignal,
    pub source: ResponseSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_error: Option<ProviderError>,
}

/// Applies one recognition opportunity to `state`.
///
/// Unaddressed raises the intensity (capped) and counts a failure; addressed
/// lowers it (floored at 1). A neutral state offers no opportunity and is
/// returned unchanged.
pub fn escalate_emotion(state: &DialogueState, addressed: bool) -> DialogueState {
    let mut s = state.clone();
    if s.emotion.is_neutral() {
        return s;
    }
    if addressed {
        s.emotion = s.emotion.soothed();
    } else {
        s.emotion = s.emotion.escalated();
        s.failure_count = (s.failure_count + 1).min(MAX_FAILURES);
    }
    s
}

/// Success or timeout signal for `state`. Escalation is handled separately.
pub fn module_progress(state: &DialogueState, config: &DialogueConfig) -> ControlSignal {
    if state.demo_count >= config.success_threshold {
        ControlSignal::SuccessEnd
    } else if state.elapsed_ms() >= config.module_cap_ms || state.session_elapsed_ms() >= config.session_cap_ms {
        ControlSignal::TimeoutEnd
    } else {
        ControlSignal::Continue
    }
}

/// Template emotion combined with the escalated state: the line picks the
/// expression and the intensity never drops below what escalation reached.
fn compose(line: EmotionTag, state: EmotionTag) -> EmotionTag {
    if line.is_neutral() || state.is_neutral() {
        return line;
    }
    EmotionTag::new(line.base(), line.intensity().max(state.intensity())).expect("intensity in range")
}

fn pick_line(node: &SchemaNode, visits: &mut BTreeMap<String, u32>) -> PatientLine {
    let n = visits.entry(node.id.clone()).or_insert(0);
    let line = node.lines[*n as usize % node.lines.len()].clone();
    *n += 1;
    line
}

#[derive(Debug, Clone)]
pub struct DialogueEngine {
    schema: Schema,
    persona: PersonaFacts,
    config: DialogueConfig,
}

impl DialogueEngine {
    pub fn new(schema: Schema, persona: PersonaFacts, config: DialogueConfig) -> Self {
        Self { schema, persona, config }
    }

    /// Shipped schema and persona with default thresholds.
    pub fn builtin() -> Self {
        Self::new(Schema::builtin(), PersonaFacts::builtin(), DialogueConfig::default())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn persona(&self) -> &PersonaFacts {
        &self.persona
    }

    pub fn config(&self) -> &DialogueConfig {
        &self.config
    }

    fn module(&self, kind: ModuleKind) -> Result<&ModuleSchema, DialogueError> {
        self.schema.module(kind).ok_or(DialogueError::UnknownModule(kind))
    }

    fn node<'a>(&self, module: &'a ModuleSchema, id: &str) -> Result<&'a SchemaNode, DialogueError> {
        module.node(id).ok_or_else(|| DialogueError::UnknownNode(id.to_string()))
    }

    /// Opens a module with the start node's first line.
    pub fn start(&self, module: ModuleKind, at_ms: u64, session_start_ms: u64) -> Result<DialogueState, DialogueError> {
        let m = self.module(module)?;
        let node = self.node(m, &m.start)?;
        let mut visits = BTreeMap::new();
        let line = pick_line(node, &mut visits);
        let mut history = Transcript::new();
        let mut opening = Turn::patient(line.text, line.emotion).expecting(node.expects);
        opening.start_ms = Some(at_ms);
        opening.node = Some(node.id.clone());
        history.push(opening);
        Ok(DialogueState {
            module,
            node: node.id.clone(),
            emotion: line.emotion,
            failure_count: 0,
            demo_count: 0,
            session_start_ms: session_start_ms.min(at_ms),
            module_start_ms: at_ms,
            clock_ms: at_ms,
            visits,
            history,
            signal: ControlSignal::Continue,
            provider_fallbacks: 0,
        })
    }

    /// Rule step: records the trainee turn, applies escalation and progress,
    /// picks the next node and decides whether the provider is needed.
    pub fn plan(
        &self,
        state: &DialogueState,
        input: &TraineeInput,
        classification: &SkillClassification,
    ) -> Result<TurnPlan, DialogueError> {
        if state.signal.is_end() {
            return Err(DialogueError::Ended(state.signal));
        }
        if input.text.trim().is_empty() {
            return Err(DialogueError::EmptyUtterance);
        }
        let module = self.module(state.module)?;
        let node = self.node(module, &state.node)?;
        let labels = &classification.labels;

        let mut s = state.clone();
        if let Some(t) = input.end_ms.or(input.start_ms) {
            s.clock_ms = s.clock_ms.max(t);
        }
        let mut turn = Turn::trainee(input.text.clone()).with_labels(labels.iter().copied());
        turn.start_ms = input.start_ms;
        turn.end_ms = input.end_ms;
        turn.node = Some(node.id.clone());
        s.history.push(turn);

        if !state.emotion.is_neutral() {
            s = escalate_emotion(&s, labels.contains(&SkillLabel::Empathize));
        }
        if node.expects.is_some_and(|e| labels.contains(&e)) {
            s.demo_count += 1;
        }

        let signal = if s.failure_count >= MAX_FAILURES {
            ControlSignal::EscalationTerminate
        } else {
            module_progress(&s, &self.config)
        };
        if let Some(line) = module.endings.for_signal(signal) {
            return Ok(TurnPlan { state: s, signal, reply: PlannedReply::Ending { line: line.clone() }, request: None });
        }

        let target = node
            .skill_target(labels)
            .or_else(|| if labels.is_empty() { None } else { node.fallback_target() });
        match target {
            Some(id) => {
                let next = self.node(module, id)?;
                let line = pick_line(next, &mut s.visits);
                let emotion = compose(line.emotion, s.emotion);
                s.node = next.id.clone();
                let request = self
                    .config
                    .paraphrase
                    .then(|| build_llm_prompt(&s, Some(&line.text), &self.persona, &self.config));
                Ok(TurnPlan { state: s, signal, reply: PlannedReply::Template { line, emotion }, request })
            }
            None => {
                let fallback_node = node.fallback_target().unwrap_or(&node.id).to_string();
                let request = Some(build_llm_prompt(&s, None, &self.persona, &self.config));
                let emotion = s.emotion;
                Ok(TurnPlan { state: s, signal, reply: PlannedReply::Direct { emotion, fallback_node }, request })
            }
        }
    }

    /// Provider step: folds the provider result into the reply. `result` is
    /// `None` when no call was made; a plan that wanted one then falls back to
    /// the schema as if the provider had failed.
    pub fn finish(
        &self,
        plan: TurnPlan,
        result: Option<Result<ProviderResponse, ProviderError>>,
    ) -> Result<TurnOutcome, DialogueError> {
        let TurnPlan { mut state, signal, reply, request } = plan;
        let result = match (request.is_some(), result) {
            (false, _) => None,
            (true, None) => Some(Err(ProviderError::Unavailable("no provider call made".into()))),
            (true, Some(Ok(r))) if r.text.trim().is_empty() => {
                Some(Err(ProviderError::InvalidResponse("empty text".into())))
            }
            (true, Some(r)) => Some(r),
        };
        let mut provider_error = None;
        let (text, emotion, source) = match reply {
            PlannedReply::Ending { line } => (line.text, line.emotion, ResponseSource::Ending),
            PlannedReply::Template { line, emotion } => match result {
                None => (line.text, emotion, ResponseSource::Schema),
                Some(Ok(r)) => (r.text, emotion, ResponseSource::Paraphrased),
                Some(Err(e)) => {
                    provider_error = Some(e);
                    (line.text, emotion, ResponseSource::SchemaFallback)
                }
            },
            PlannedReply::Direct { emotion, fallback_node } => match result {
                Some(Ok(r)) => {
                    let emotion = r.emotion_hint.map_or(emotion, |b| emotion.with_base(b));
                    (r.text, emotion, ResponseSource::LlmDirect)
                }
                other => {
                    provider_error = other.and_then(Result::err);
                    let module = self.module(state.module)?;
                    let node = self.node(module, &fallback_node)?;
                    let line = pick_line(node, &mut state.visits);
                    (line.text, compose(line.emotion, emotion), ResponseSource::SchemaFallback)
                }
            },
        };
        if provider_error.is_some() {
            state.provider_fallbacks += 1;
        }
        let expects = if signal.is_end() {
            None
        } else {
            let module = self.module(state.module)?;
            self.node(module, &state.node)?.expects
        };
        let mut turn = Turn::patient(text.clone(), emotion).expecting(expects);
        turn.start_ms = Some(state.clock_ms);
        turn.node = (!signal.is_end()).then(|| state.node.clone());
        state.history.push(turn);
        state.emotion = emotion;
        state.signal = signal;
        Ok(TurnOutcome { state, response: text, emotion, signal, source, provider_error })
    }

    /// Both steps with a blocking provider.
    pub fn advance(
        &self,
        state: &DialogueState,
        input: &TraineeInput,
        classification: &SkillClassification,
        provider: &dyn LlmProvider,
    ) -> Result<TurnOutcome, DialogueError> {
        let plan = self.plan(state, input, classification)?;
        let result = plan.request.as_ref().map(|r| provider.complete(r));
        self.finish(plan, result)
    }
}
