//! Crash recovery, provider faults, turn serialization and audit completeness.

mod support;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use sic_core::dialogue::{DialogueEngine, FailingProvider, ProviderError, ResponseSource, TraineeInput};
use sic_core::feedback::Suggestion;
use sic_core::skill::{classify_utterance, LabelSource, RuleSet, SkillLabel};
use sic_core::transcript::Speaker;
use sic_service::provider::SkillModel;
use sic_service::record::{CallKind, CallOutcome};
use sic_service::{CallPolicy, CreateSession, FileStore, MemoryStore, ServiceError, SessionService, Store, TurnRequest};
use support::{drive, mock, script_turns, service_with, Counting, Flaky, Gate, Stalled, SCRIPT};

fn memory() -> Arc<dyn Store> {
    Arc::new(MemoryStore::new())
}

#[tokio::test]
async fn restart_mid_session_gives_the_same_next_turn() {
    let reference_dir = tempfile::tempdir().unwrap();
    let reference = service_with(Arc::new(FileStore::open(reference_dir.path()).unwrap()), mock(), 0);
    let rid = reference.create(CreateSession::default()).await.unwrap().id;
    let (turns, want): (Vec<TurnRequest>, Vec<_>) = drive(&reference, rid).await.into_iter().unzip();
    assert_eq!(want.last().unwrap().status, sic_service::SessionStatus::Completed);
    let crash_after = 4;

    let dir = tempfile::tempdir().unwrap();
    let first = service_with(Arc::new(FileStore::open(dir.path()).unwrap()), mock(), 0);
    let id = first.create(CreateSession::default()).await.unwrap().id;
    let mut got = Vec::new();
    for t in &turns[..crash_after] {
        got.push(first.post_turn(id, t.clone(), None).await.unwrap());
    }
    drop(first);
    // a write torn by the crash leaves only a temp file behind
    std::fs::write(dir.path().join(".session-torn.tmp"), b"{\"schema_ver").unwrap();

    let restarted = service_with(Arc::new(FileStore::open(dir.path()).unwrap()), mock(), 0);
    for t in &turns[crash_after..] {
        got.push(restarted.post_turn(id, t.clone(), None).await.unwrap());
    }
    assert_eq!(got, want);

    let a = restarted.export(id).await.unwrap().record;
    let b = reference.export(rid).await.unwrap().record;
    assert_eq!(a.modules, b.modules);
    assert_eq!(a.classifications, b.classifications);
    assert_eq!(a.status, b.status);
    assert_eq!(FileStore::open(dir.path()).unwrap().ids().unwrap(), vec![id]);
}

#[tokio::test]
async fn outage_falls_back_to_schema_and_is_audited() {
    let svc = service_with(memory(), Arc::new(Flaky::new(u32::MAX)), 1);
    let view = svc.create(CreateSession::default()).await.unwrap();
    let t = script_turns().remove(0);
    let resp = svc.post_turn(view.id, t.clone(), None).await.unwrap();
    assert_eq!(resp.source, ResponseSource::SchemaFallback);
    assert!(resp.provider_error.as_deref().unwrap().contains("injected outage"));

    // same reply as the engine gives with a dead provider
    let engine = DialogueEngine::builtin();
    let start = engine.start(SCRIPT[0].0, 0, 0).unwrap();
    let input = TraineeInput { text: t.text.clone(), start_ms: t.start_ms, end_ms: t.end_ms };
    let cls = classify_utterance(&t.text, &RuleSet::builtin(), None);
    let offline = engine.advance(&start, &input, &cls, &FailingProvider::default()).unwrap();
    assert_eq!(resp.response, offline.response);
    assert_eq!(resp.emotion, offline.emotion);

    let rec = svc.export(view.id).await.unwrap().record;
    let attempts: Vec<_> = rec.audit.iter().filter(|a| a.kind == CallKind::Dialogue).collect();
    assert_eq!(attempts.len(), 2);
    assert_eq!(attempts.iter().map(|a| a.attempt).collect::<Vec<_>>(), [1, 2]);
    assert!(attempts.iter().all(|a| !a.outcome.is_ok()));
    assert!(attempts[0].request["system_instructions"].is_string());
    assert_eq!(rec.current().unwrap().provider_fallbacks, 1);
}

#[tokio::test]
async fn retry_recovers_from_one_failure() {
    let flaky = Arc::new(Flaky::new(1));
    let svc = service_with(memory(), flaky.clone(), 1);
    let id = svc.create(CreateSession::default()).await.unwrap().id;
    let resp = svc.post_turn(id, script_turns().remove(0), None).await.unwrap();
    assert_eq!(resp.source, ResponseSource::Paraphrased);
    assert!(resp.provider_error.is_none());
    let rec = svc.export(id).await.unwrap().record;
    let outcomes: Vec<bool> = rec.audit.iter().map(|a| a.outcome.is_ok()).collect();
    assert_eq!(outcomes, [false, true]);
    assert_eq!(flaky.calls.load(Ordering::SeqCst), 2);
    assert_eq!(rec.audit.iter().map(|a| a.seq).collect::<Vec<_>>(), [1, 2]);
}

#[tokio::test]
async fn slow_provider_times_out() {
    let svc = SessionService::new(support::engines(), memory(), Arc::new(Stalled), CallPolicy::new(200, 0));
    let id = svc.create(CreateSession::default()).await.unwrap().id;
    let resp = svc.post_turn(id, script_turns().remove(0), None).await.unwrap();
    assert_eq!(resp.source, ResponseSource::SchemaFallback);
    assert_eq!(resp.provider_error.as_deref(), Some(ProviderError::Timeout.to_string().as_str()));
    let rec = svc.export(id).await.unwrap().record;
    assert_eq!(rec.audit.len(), 1);
    assert!(rec.audit[0].duration_ms >= 200);
    assert_eq!(rec.audit[0].outcome, CallOutcome::Error { error: "provider timed out".into() });
}

#[tokio::test]
async fn failed_suggestion_is_not_cached() {
    let flaky = Arc::new(Flaky::new(0));
    let svc = service_with(memory(), flaky.clone(), 0);
    let id = svc.create(CreateSession { plan: Some(vec![SCRIPT[0].0]), persona: None }).await.unwrap().id;
    for t in script_turns().into_iter().take(3) {
        svc.post_turn(id, t, None).await.unwrap();
    }
    flaky.remaining.store(1, Ordering::SeqCst);
    let down = svc.feedback(id, SCRIPT[0].0).await.unwrap();
    assert!(matches!(down.suggestion, Suggestion::Unavailable { .. }));
    let up = svc.feedback(id, SCRIPT[0].0).await.unwrap();
    assert!(matches!(up.suggestion, Suggestion::Ready { .. }));
    let calls = flaky.calls.load(Ordering::SeqCst);
    let cached = svc.feedback(id, SCRIPT[0].0).await.unwrap();
    assert_eq!(cached, up);
    assert_eq!(flaky.calls.load(Ordering::SeqCst), calls, "cached report must not call the provider");
    let rec = svc.export(id).await.unwrap().record;
    let sugg: Vec<bool> = rec.audit.iter().filter(|a| a.kind == CallKind::Suggestion).map(|a| a.outcome.is_ok()).collect();
    assert_eq!(sugg, [false, true]);
    assert_eq!(rec.feedback.len(), 1);
}

struct Model {
    labels: Result<BTreeSet<SkillLabel>, ProviderError>,
    calls: AtomicU32,
}

#[async_trait]
impl SkillModel for Model {
    async fn labels(&self, _utterance: &str) -> Result<BTreeSet<SkillLabel>, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.labels.clone()
    }
}

#[tokio::test]
async fn skill_model_labels_are_merged_and_outages_degrade() {
    let model = Arc::new(Model { labels: Ok([SkillLabel::Empower].into()), calls: AtomicU32::new(0) });
    let svc = service_with(memory(), mock(), 0).with_skill_model(model.clone(), CallPolicy::new(500, 0));
    let id = svc.create(CreateSession::default()).await.unwrap().id;
    let resp = svc.post_turn(id, script_turns().remove(0), None).await.unwrap();
    assert_eq!(resp.labels, [SkillLabel::Empathize, SkillLabel::Empower].into());
    let rec = svc.export(id).await.unwrap().record;
    let c = &rec.classifications[0].classification;
    assert_eq!(c.sources[&SkillLabel::Empower], LabelSource::ModelOnly);
    assert_eq!(c.sources[&SkillLabel::Empathize], LabelSource::RuleOnly);
    assert_eq!(rec.audit.iter().filter(|a| a.kind == CallKind::Classifier).count(), 1);

    let down = Arc::new(Model { labels: Err(ProviderError::Unavailable("model down".into())), calls: AtomicU32::new(0) });
    let svc = service_with(memory(), mock(), 0).with_skill_model(down, CallPolicy::new(500, 0));
    let id = svc.create(CreateSession::default()).await.unwrap().id;
    let resp = svc.post_turn(id, script_turns().remove(0), None).await.unwrap();
    assert_eq!(resp.labels, [SkillLabel::Empathize].into());
    assert!(resp.classifier_error.unwrap().contains("model down"));
    let rec = svc.export(id).await.unwrap().record;
    assert_eq!(rec.classifications[0].model_error.as_deref(), Some("provider unavailable: model down"));
}

#[tokio::test]
async fn second_turn_in_flight_is_rejected_not_queued() {
    let gate = Arc::new(Gate::new());
    let svc = Arc::new(service_with(memory(), gate.clone(), 0));
    let a = svc.create(CreateSession::default()).await.unwrap().id;
    let b = svc.create(CreateSession::default()).await.unwrap().id;
    let turns = script_turns();

    let first = tokio::spawn({
        let (svc, t) = (svc.clone(), turns[0].clone());
        async move { svc.post_turn(a, t, None).await }
    });
    gate.entered.acquire().await.unwrap().forget();
    let second = svc.post_turn(a, turns[1].clone(), None).await;
    assert!(matches!(second, Err(ServiceError::TurnInFlight)), "{second:?}");

    // another session is not blocked by this one
    let other = tokio::spawn({
        let (svc, t) = (svc.clone(), turns[0].clone());
        async move { svc.post_turn(b, t, None).await }
    });
    gate.entered.acquire().await.unwrap().forget();
    gate.permits.add_permits(2);
    first.await.unwrap().unwrap();
    other.await.unwrap().unwrap();

    // the rejected turn left no trace
    let rec = svc.export(a).await.unwrap().record;
    assert_eq!(rec.trainee_turns(), 1);
    gate.permits.add_permits(1);
    svc.post_turn(a, turns[1].clone(), None).await.unwrap();
}

#[tokio::test]
async fn concurrent_creates_get_distinct_ids() {
    let dir = tempfile::tempdir().unwrap();
    let store: Arc<dyn Store> = Arc::new(FileStore::open(dir.path()).unwrap());
    let svc = Arc::new(service_with(store.clone(), mock(), 0));
    let tasks: Vec<_> = (0..64)
        .map(|_| {
            let svc = svc.clone();
            tokio::spawn(async move { svc.create(CreateSession::default()).await.unwrap().id })
        })
        .collect();
    let mut ids = BTreeSet::new();
    for t in tasks {
        ids.insert(t.await.unwrap());
    }
    assert_eq!(ids.len(), 64);
    assert_eq!(store.ids().unwrap().into_iter().collect::<BTreeSet<_>>(), ids);
}

#[tokio::test]
async fn every_provider_call_is_audited_and_every_turn_labelled() {
    let counting = Arc::new(Counting::default());
    let model = Arc::new(Model { labels: Ok(BTreeSet::new()), calls: AtomicU32::new(0) });
    let svc = service_with(memory(), counting.clone(), 0).with_skill_model(model.clone(), CallPolicy::new(500, 0));
    let id = svc.create(CreateSession::default()).await.unwrap().id;
    drive(&svc, id).await;
    for (m, _) in SCRIPT {
        svc.feedback(id, *m).await.unwrap();
    }
    let rec = svc.export(id).await.unwrap().record;
    let chat_entries = rec.audit.iter().filter(|a| a.kind != CallKind::Classifier).count();
    assert_eq!(chat_entries as u32, counting.calls.load(Ordering::SeqCst));
    let model_entries = rec.audit.iter().filter(|a| a.kind == CallKind::Classifier).count();
    assert_eq!(model_entries as u32, model.calls.load(Ordering::SeqCst));

    // one classification per classifier call, matching the transcript labels
    assert_eq!(rec.classifications.len(), model_entries);
    assert_eq!(rec.classifications.len(), rec.trainee_turns());
    for c in &rec.classifications {
        let turn = &rec.module(c.module).unwrap().history.turns()[c.turn];
        assert_eq!(turn.speaker, Speaker::Trainee);
        assert_eq!(turn.labels, c.classification.labels);
    }
    let seqs: Vec<u64> = rec.audit.iter().map(|a| a.seq).collect();
    assert_eq!(seqs, (1..=rec.audit.len() as u64).collect::<Vec<_>>());
}

#[tokio::test]
async fn session_cap_completes_the_session() {
    let svc = service_with(memory(), mock(), 0);
    let id = svc.create(CreateSession::default()).await.unwrap().id;
    let late = 30 * 60 * 1000;
    let resp = svc
        .post_turn(id, TurnRequest { text: "How are you feeling today?".into(), start_ms: Some(late), end_ms: Some(late + 2_000) }, None)
        .await
        .unwrap();
    assert!(resp.signal.is_end());
    assert!(resp.next.is_none());
    assert_eq!(resp.status, sic_service::SessionStatus::Completed);
}

#[test]
fn corrupt_and_future_documents_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::open(dir.path()).unwrap();
    let id = uuid::Uuid::new_v4();
    std::fs::write(dir.path().join(format!("{id}.json")), b"not json").unwrap();
    assert!(matches!(store.load(id), Err(sic_service::store::StoreError::Corrupt { .. })));
    std::fs::write(dir.path().join(format!("{id}.json")), br#"{"schema_version": 99}"#).unwrap();
    assert!(matches!(store.load(id), Err(sic_service::store::StoreError::Version { found: 99, .. })));
    assert!(store.load(uuid::Uuid::new_v4()).unwrap().is_none());
}
