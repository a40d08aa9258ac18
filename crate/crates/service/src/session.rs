use std::collections::{BTreeSet, HashMap};
use std::future::Future;
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, Instant};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use sic_core::dialogue::{
    ControlSignal, DialogueConfig, DialogueEngine, DialogueError, DialogueState, EmotionTag, FailingProvider,
    MockProvider, ModuleKind, PersonaFacts, ProviderError, ResponseSource, Schema, TraineeInput,
};
use sic_core::feedback::{
    ExampleStatements, FeedbackConfig, FeedbackEngine, FeedbackReport, FewShotBank, HedgeLexicon, Suggestion,
};
use sic_core::skill::{classify_utterance, RuleSet, SkillLabel};
use sic_core::transcript::Speaker;
use tokio::sync::{mpsc, Mutex as AsyncMutex, OwnedMutexGuard};
use uuid::Uuid;

use crate::config::{DataPaths, ServiceConfig};
use crate::provider::{ChatProvider, HttpChat, HttpSkillModel, InProcess, SkillModel};
use crate::record::{
    AuditEntry, CallKind, CallOutcome, ClassificationEntry, SessionArchive, SessionRecord, SessionStatus,
    ARCHIVE_FORMAT, SCHEMA_VERSION,
};
use crate::store::{FileStore, MemoryStore, Store, StoreError};

/// Longest accepted utterance, in characters.
pub const MAX_UTTERANCE_CHARS: usize = 4000;

const RETRY_BACKOFF: Duration = Duration::from_millis(50);

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session {0}")]
    UnknownSession(Uuid),
    #[error("session has ended")]
    SessionEnded,
    #[error("another turn is in flight for this session")]
    TurnInFlight,
    #[error("module {0} has not ended")]
    ModuleNotEnded(ModuleKind),
    #[error("module {0} is not in this session's plan")]
    ModuleNotInPlan(ModuleKind),
    #[error("invalid module plan: {0}")]
    InvalidPlan(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("session {0} already exists")]
    SessionExists(Uuid),
    #[error(transparent)]
    Storage(#[from] StoreError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, thiserror::Error)]
#[error("loading {what}: {message}")]
pub struct LoadError {
    pub what: String,
    pub message: String,
}

/// Schema, persona, rules and feedback banks shared by every session.
#[derive(Debug, Clone)]
pub struct Engines {
    pub dialogue: DialogueEngine,
    pub rules: RuleSet,
    pub feedback: FeedbackEngine,
}

impl Engines {
    pub fn builtin(dialogue: DialogueConfig, feedback: FeedbackConfig) -> Self {
        let mut fb = FeedbackEngine::builtin();
        fb.config = feedback;
        Self {
            dialogue: DialogueEngine::new(Schema::builtin(), PersonaFacts::builtin(), dialogue),
            rules: RuleSet::builtin(),
            feedback: fb,
        }
    }

    /// Builtin data with any configured file swapped in.
    pub fn load(config: &ServiceConfig) -> Result<Self, LoadError> {
        let p: &DataPaths = &config.paths;
        fn read(what: &str, path: &std::path::Path) -> Result<String, LoadError> {
            std::fs::read_to_string(path)
                .map_err(|e| LoadError { what: format!("{what} {}", path.display()), message: e.to_string() })
        }
        fn fail(what: &str, e: impl std::fmt::Display) -> LoadError {
            LoadError { what: what.into(), message: e.to_string() }
        }
        let schema = match &p.schema {
            Some(path) => read("schema", path)?.parse::<Schema>().map_err(|e| fail("schema", e))?,
            None => Schema::builtin(),
        };
        let persona = match &p.persona {
            Some(path) => PersonaFacts::from_toml(&read("persona", path)?).map_err(|e| fail("persona", e))?,
            None => PersonaFacts::builtin(),
        };
        let rules = if p.lexicons.is_empty() {
            RuleSet::builtin()
        } else {
            RuleSet::load_files(&p.lexicons).map_err(|e| fail("lexicons", e))?
        };
        let mut fb = FeedbackEngine::builtin();
        fb.config = config.feedback.clone();
        if let Some(path) = &p.hedges {
            fb.hedges = HedgeLexicon::from_toml(&read("hedges", path)?).map_err(|e| fail("hedges", e))?;
        }
        if let Some(path) = &p.few_shot {
            fb.few_shot = FewShotBank::from_toml(&read("few-shot bank", path)?).map_err(|e| fail("few-shot bank", e))?;
        }
        if let Some(path) = &p.statements {
            fb.statements =
                ExampleStatements::from_toml(&read("statements", path)?).map_err(|e| fail("statements", e))?;
        }
        if let Some(path) = &p.context {
            fb.context = read("context", path)?;
        }
        Ok(Self { dialogue: DialogueEngine::new(schema, persona, config.dialogue.clone()), rules, feedback: fb })
    }
}

/// Bound and retry budget for one kind of outbound call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CallPolicy {
    pub timeout: Duration,
    pub retries: u32,
}

impl CallPolicy {
    pub fn new(timeout_ms: u64, retries: u32) -> Self {
        Self { timeout: Duration::from_millis(timeout_ms), retries }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Module order. Defaults to all modules in the standard order.
    #[serde(default)]
    pub plan: Option<Vec<ModuleKind>>,
    #[serde(default)]
    pub persona: Option<PersonaFacts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRequest {
    pub text: String,
    /// Milliseconds since session start. The server clock fills in when both
    /// are absent.
    #[serde(default)]
    pub start_ms: Option<u64>,
    #[serde(default)]
    pub end_ms: Option<u64>,
}

/// A patient line as shown to the trainee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientLineView {
    pub module: ModuleKind,
    pub text: String,
    pub emotion: EmotionTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleView {
    pub module: ModuleKind,
    pub signal: ControlSignal,
    pub emotion: EmotionTag,
    pub demo_count: u32,
    pub failure_count: u8,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: Uuid,
    pub status: SessionStatus,
    pub created_at: chrono::DateTime<Utc>,
    pub plan: Vec<ModuleKind>,
    pub modules: Vec<ModuleView>,
    /// Latest patient line.
    pub patient: Option<PatientLineView>,
    pub session_elapsed_ms: u64,
    pub session_cap_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnResponse {
    pub module: ModuleKind,
    pub response: String,
    pub emotion: EmotionTag,
    pub signal: ControlSignal,
    pub source: ResponseSource,
    pub labels: BTreeSet<SkillLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier_error: Option<String>,
    /// Opening line of the module that starts after this one ended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next: Option<PatientLineView>,
    pub status: SessionStatus,
}

/// Progress notifications while a turn runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurnEvent {
    Classified(BTreeSet<SkillLabel>),
    /// Reply text fragment from the provider.
    Delta(String),
    /// A provider attempt failed and another one starts; earlier fragments are void.
    Retry { attempt: u32 },
}

pub type EventSink = mpsc::UnboundedSender<TurnEvent>;

type LockMap = Arc<StdMutex<HashMap<Uuid, Arc<AsyncMutex<()>>>>>;

/// Exclusive hold on one session. The map entry goes away with the last holder.
struct SessionGuard {
    locks: LockMap,
    id: Uuid,
    guard: Option<OwnedMutexGuard<()>>,
}

impl Drop for SessionGuard {
    fn drop(&mut self) {
        self.guard.take();
        let mut map = self.locks.lock().expect("lock map");
        if map.get(&self.id).is_some_and(|m| Arc::strong_count(m) == 1) {
            map.remove(&self.id);
        }
    }
}

pub struct SessionService {
    engines: Engines,
    store: Arc<dyn Store>,
    chat: Arc<dyn ChatProvider>,
    chat_policy: CallPolicy,
    model: Option<(Arc<dyn SkillModel>, CallPolicy)>,
    locks: LockMap,
}

fn view_of(state: &DialogueState) -> ModuleView {
    ModuleView {
        module: state.module,
        signal: state.signal,
        emotion: state.emotion,
        demo_count: state.demo_count,
        failure_count: state.failure_count,
        elapsed_ms: state.elapsed_ms(),
    }
}

fn last_patient(state: &DialogueState) -> Option<PatientLineView> {
    state.history.turns().iter().rev().find(|t| t.speaker == Speaker::Patient).map(|t| PatientLineView {
        module: state.module,
        text: t.text.clone(),
        emotion: t.emotion.unwrap_or(EmotionTag::NEUTRAL),
    })
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("audit payload serializes")
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

impl SessionService {
    pub fn new(engines: Engines, store: Arc<dyn Store>, chat: Arc<dyn ChatProvider>, chat_policy: CallPolicy) -> Self {
        Self { engines, store, chat, chat_policy, model: None, locks: LockMap::default() }
    }

    pub fn with_skill_model(mut self, model: Arc<dyn SkillModel>, policy: CallPolicy) -> Self {
        self.model = Some((model, policy));
        self
    }

    /// Store, provider and skill model as configured.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, LoadError> {
        let engines = Engines::load(config)?;
        let store: Arc<dyn Store> = match &config.data_dir {
            Some(dir) => Arc::new(
                FileStore::open(dir).map_err(|e| LoadError { what: "data dir".into(), message: e.to_string() })?,
            ),
            None => Arc::new(MemoryStore::new()),
        };
        let p = &config.provider;
        let chat: Arc<dyn ChatProvider> = if p.mock {
            Arc::new(InProcess(MockProvider))
        } else {
            Arc::new(HttpChat::new(p).map_err(|e| LoadError { what: "provider".into(), message: e.to_string() })?)
        };
        let mut svc = Self::new(engines, store, chat, CallPolicy::new(p.timeout_ms, p.retries));
        if let Some(c) = &config.classifier {
            let m = HttpSkillModel::new(c).map_err(|e| LoadError { what: "classifier".into(), message: e.to_string() })?;
            svc = svc.with_skill_model(Arc::new(m), CallPolicy::new(c.timeout_ms, c.retries));
        }
        Ok(svc)
    }

    /// Mock provider, in-memory store, builtin data.
    pub fn for_tests() -> Self {
        Self::new(
            Engines::builtin(DialogueConfig::default(), FeedbackConfig::default()),
            Arc::new(MemoryStore::new()),
            Arc::new(InProcess(MockProvider)),
            CallPolicy::new(1_000, 0),
        )
    }

    /// Provider that always fails, for offline demos of the schema fallback.
    pub fn offline_provider() -> Arc<dyn ChatProvider> {
        Arc::new(InProcess(FailingProvider { reason: "provider disabled".into() }))
    }

    pub fn engines(&self) -> &Engines {
        &self.engines
    }

    fn dialogue_for(&self, persona: &PersonaFacts) -> std::borrow::Cow<'_, DialogueEngine> {
        let base = &self.engines.dialogue;
        if base.persona() == persona {
            std::borrow::Cow::Borrowed(base)
        } else {
            std::borrow::Cow::Owned(DialogueEngine::new(base.schema().clone(), persona.clone(), base.config().clone()))
        }
    }

    fn try_hold(&self, id: Uuid) -> Option<SessionGuard> {
        let mut map = self.locks.lock().expect("lock map");
        let m = map.entry(id).or_default().clone();
        let guard = m.try_lock_owned().ok()?;
        Some(SessionGuard { locks: self.locks.clone(), id, guard: Some(guard) })
    }

    async fn hold(&self, id: Uuid) -> SessionGuard {
        let m = self.locks.lock().expect("lock map").entry(id).or_default().clone();
        let guard = m.lock_owned().await;
        SessionGuard { locks: self.locks.clone(), id, guard: Some(guard) }
    }

    async fn blocking<T: Send + 'static>(
        &self,
        f: impl FnOnce(&dyn Store) -> Result<T, StoreError> + Send + 'static,
    ) -> Result<T, ServiceError> {
        let store = self.store.clone();
        tokio::task::spawn_blocking(move || f(store.as_ref())).await.map_err(internal)?.map_err(ServiceError::from)
    }

    async fn load(&self, id: Uuid) -> Result<SessionRecord, ServiceError> {
        self.blocking(move |s| s.load(id)).await?.ok_or(ServiceError::UnknownSession(id))
    }

    async fn save(&self, record: SessionRecord) -> Result<SessionRecord, ServiceError> {
        self.blocking(move |s| s.save(&record).map(|_| record)).await
    }

    fn view(&self, r: &SessionRecord) -> SessionView {
        SessionView {
            id: r.id,
            status: r.status,
            created_at: r.created_at,
            plan: r.plan.clone(),
            modules: r.modules.iter().map(view_of).collect(),
            patient: r.current().and_then(last_patient),
            session_elapsed_ms: r.current().map_or(0, |s| s.session_elapsed_ms()),
            session_cap_ms: self.engines.dialogue.config().session_cap_ms,
        }
    }

    fn validate_plan(&self, plan: &[ModuleKind]) -> Result<(), ServiceError> {
        if plan.is_empty() {
            return Err(ServiceError::InvalidPlan("plan is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for &m in plan {
            if !seen.insert(m) {
                return Err(ServiceError::InvalidPlan(format!("module {m} appears twice")));
            }
            if self.engines.dialogue.schema().module(m).is_none() {
                return Err(ServiceError::InvalidPlan(format!("schema has no {m} module")));
            }
        }
        Ok(())
    }

    pub async fn create(&self, req: CreateSession) -> Result<SessionView, ServiceError> {
        let plan = req.plan.unwrap_or_else(|| ModuleKind::ALL.to_vec());
        self.validate_plan(&plan)?;
        let persona = req.persona.unwrap_or_else(|| self.engines.dialogue.persona().clone());
        persona.validate().map_err(|e| ServiceError::InvalidRequest(e.to_string()))?;
        let first = self.dialogue_for(&persona).start(plan[0], 0, 0).map_err(internal)?;
        let mut record = SessionRecord {
            schema_version: SCHEMA_VERSION,
            id: Uuid::new_v4(),
            created_at: Utc::now(),
            status: SessionStatus::Created,
            plan,
            persona,
            modules: vec![first],
            classifications: Vec::new(),
            feedback: Default::default(),
            audit: Vec::new(),
        };
        loop {
            let r = record.clone();
            if self.blocking(move |s| s.insert(&r)).await? {
                return Ok(self.view(&record));
            }
            record.id = Uuid::new_v4();
        }
    }

    pub async fn get(&self, id: Uuid) -> Result<SessionView, ServiceError> {
        Ok(self.view(&self.load(id).await?))
    }

    /// One provider call under `policy`, with one audit entry per attempt.
    async fn call<T, F, Fut>(
        policy: CallPolicy,
        kind: CallKind,
        module: ModuleKind,
        request: serde_json::Value,
        record: &mut SessionRecord,
        events: Option<&EventSink>,
        mut attempt_fn: F,
    ) -> Result<T, ProviderError>
    where
        T: Serialize,
        F: FnMut() -> Fut,
        Fut: Future<Output = Result<T, ProviderError>>,
    {
        let mut attempt = 1;
        loop {
            let started = Instant::now();
            let at = Utc::now();
            let result = match tokio::time::timeout(policy.timeout, attempt_fn()).await {
                Ok(r) => r,
                Err(_) => Err(ProviderError::Timeout),
            };
            let outcome = match &result {
                Ok(v) => CallOutcome::Ok { response: to_json(v) },
                Err(e) => CallOutcome::Error { error: e.to_string() },
            };
            record.audit.push(AuditEntry {
                seq: record.next_seq(),
                at,
                kind,
                module,
                attempt,
                duration_ms: started.elapsed().as_millis() as u64,
                request: request.clone(),
                outcome,
            });
            match result {
                Ok(v) => return Ok(v),
                Err(e) if attempt > policy.retries => return Err(e),
                Err(_) => {
                    tokio::time::sleep(RETRY_BACKOFF * 2u32.pow(attempt - 1)).await;
                    attempt += 1;
                    if let Some(tx) = events {
                        let _ = tx.send(TurnEvent::Retry { attempt });
                    }
                }
            }
        }
    }

    /// Classifies, advances the dialogue and persists the turn pair.
    pub async fn post_turn(
        &self,
        id: Uuid,
        req: TurnRequest,
        events: Option<EventSink>,
    ) -> Result<TurnResponse, ServiceError> {
        let text = req.text.trim().to_string();
        if text.is_empty() {
            return Err(ServiceError::InvalidRequest("utterance is empty".into()));
        }
        if text.chars().count() > MAX_UTTERANCE_CHARS {
            return Err(ServiceError::InvalidRequest(format!("utterance exceeds {MAX_UTTERANCE_CHARS} characters")));
        }
        if let (Some(a), Some(b)) = (req.start_ms, req.end_ms) {
            if b < a {
                return Err(ServiceError::InvalidRequest("end_ms precedes start_ms".into()));
            }
        }
        let _guard = self.try_hold(id).ok_or(ServiceError::TurnInFlight)?;
        let mut record = self.load(id).await?;
        if record.status == SessionStatus::Completed {
            return Err(ServiceError::SessionEnded);
        }
        let state = record.current().cloned().ok_or_else(|| internal("session has no module"))?;
        if state.is_ended() {
            return Err(ServiceError::SessionEnded);
        }
        let module = state.module;

        let mut input = TraineeInput { text: text.clone(), start_ms: req.start_ms, end_ms: req.end_ms };
        if input.start_ms.is_none() && input.end_ms.is_none() {
            let now = (Utc::now() - record.created_at).num_milliseconds().max(0) as u64;
            input.start_ms = Some(now.max(state.clock_ms));
        }

        let (model_labels, model_error) = match &self.model {
            Some((model, policy)) => {
                let request = serde_json::json!({ "text": text });
                let r = Self::call(*policy, CallKind::Classifier, module, request, &mut record, None, || {
                    model.labels(&text)
                })
                .await;
                match r {
                    Ok(l) => (Some(l), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            }
            None => (None, None),
        };
        let classification = classify_utterance(&text, &self.engines.rules, model_labels.as_ref());
        if let Some(tx) = &events {
            let _ = tx.send(TurnEvent::Classified(classification.labels.clone()));
        }

        let engine = self.dialogue_for(&record.persona).into_owned();
        let plan = engine.plan(&state, &input, &classification).map_err(|e| match e {
            DialogueError::Ended(_) => ServiceError::SessionEnded,
            DialogueError::EmptyUtterance => ServiceError::InvalidRequest(e.to_string()),
            other => internal(other),
        })?;
        let turn_index = plan.state.history.len() - 1;

        let result = match plan.request.clone() {
            Some(request) => {
                let chat = self.chat.clone();
                let payload = to_json(&request);
                let r = Self::call(self.chat_policy, CallKind::Dialogue, module, payload, &mut record, events.as_ref(), || {
                    let chat = chat.clone();
                    let request = request.clone();
                    let events = events.clone();
                    async move {
                        let Some(events) = events else { return chat.complete(&request, None).await };
                        let (tx, mut rx) = mpsc::unbounded_channel::<String>();
                        let forward = tokio::spawn(async move {
                            while let Some(d) = rx.recv().await {
                                let _ = events.send(TurnEvent::Delta(d));
                            }
                        });
                        let r = chat.complete(&request, Some(&tx)).await;
                        drop(tx);
                        let _ = forward.await;
                        r
                    }
                })
                .await;
                Some(r)
            }
            None => None,
        };
        let outcome = engine.finish(plan, result).map_err(internal)?;

        record.classifications.push(ClassificationEntry {
            module,
            turn: turn_index,
            classification: classification.clone(),
            model_labels,
            model_error: model_error.clone(),
        });
        let session_start = record.modules[0].session_start_ms;
        let clock = outcome.state.clock_ms;
        let over = outcome.signal == ControlSignal::EscalationTerminate
            || outcome.state.session_elapsed_ms() >= engine.config().session_cap_ms;
        *record.modules.last_mut().expect("current module") = outcome.state;
        let mut next = None;
        record.status = SessionStatus::Active;
        if outcome.signal.is_end() {
            match record.next_module().filter(|_| !over) {
                Some(m) => {
                    let s = engine.start(m, clock, session_start).map_err(internal)?;
                    next = last_patient(&s);
                    record.modules.push(s);
                }
                None => record.status = SessionStatus::Completed,
            }
        }
        let status = record.status;
        self.save(record).await?;
        Ok(TurnResponse {
            module,
            response: outcome.response,
            emotion: outcome.emotion,
            signal: outcome.signal,
            source: outcome.source,
            labels: classification.labels,
            provider_error: outcome.provider_error.map(|e| e.to_string()),
            classifier_error: model_error,
            next,
            status,
        })
    }

    /// Report for an ended module. The suggestion is requested once; a ready
    /// report is cached in the record and returned as is afterwards.
    pub async fn feedback(&self, id: Uuid, module: ModuleKind) -> Result<FeedbackReport, ServiceError> {
        let _guard = self.hold(id).await;
        let mut record = self.load(id).await?;
        if !record.plan.contains(&module) {
            return Err(ServiceError::ModuleNotInPlan(module));
        }
        if let Some(r) = record.feedback.get(&module) {
            return Ok(r.clone());
        }
        let state = record.module(module).ok_or(ServiceError::ModuleNotEnded(module))?;
        let mut report = self.engines.feedback.compile(state).map_err(|_| ServiceError::ModuleNotEnded(module))?;
        let request = self.engines.feedback.suggestion_request(&report);
        let chat = self.chat.clone();
        let payload = to_json(&request);
        let text = Self::call(self.chat_policy, CallKind::Suggestion, module, payload, &mut record, None, || {
            let chat = chat.clone();
            let request = request.clone();
            async move { chat.complete(&request, None).await }
        })
        .await
        .and_then(|r| {
            if r.text.trim().is_empty() {
                Err(ProviderError::InvalidResponse("empty text".into()))
            } else {
                Ok(r.text)
            }
        });
        report.set_suggestion(text);
        if matches!(report.suggestion, Suggestion::Ready { .. }) {
            record.feedback.insert(module, report.clone());
        }
        self.save(record).await?;
        Ok(report)
    }

    pub async fn export(&self, id: Uuid) -> Result<SessionArchive, ServiceError> {
        Ok(SessionArchive::new(self.load(id).await?))
    }

    /// Stores an exported session under its original id.
    pub async fn import(&self, archive: SessionArchive) -> Result<SessionView, ServiceError> {
        if archive.format != ARCHIVE_FORMAT {
            return Err(ServiceError::InvalidRequest(format!("archive format {:?}", archive.format)));
        }
        if archive.version != SCHEMA_VERSION || archive.record.schema_version != SCHEMA_VERSION {
            return Err(ServiceError::InvalidRequest(format!(
                "archive version {} (record {}), expected {SCHEMA_VERSION}",
                archive.version, archive.record.schema_version
            )));
        }
        let record = archive.record;
        self.validate_plan(&record.plan)?;
        if record.modules.is_empty() || record.modules.len() > record.plan.len() {
            return Err(ServiceError::InvalidRequest("module states do not match the plan".into()));
        }
        if record.modules.iter().zip(&record.plan).any(|(s, &m)| s.module != m) {
            return Err(ServiceError::InvalidRequest("module states do not match the plan".into()));
        }
        let id = record.id;
        let r = record.clone();
        if !self.blocking(move |s| s.insert(&r)).await? {
            return Err(ServiceError::SessionExists(id));
        }
        Ok(self.view(&record))
    }
}
