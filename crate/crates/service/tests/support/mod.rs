//! Shared helpers for the service tests: request plumbing, the scripted
//! session and providers with injected faults.

#![allow(dead_code)]

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use sic_core::dialogue::{
    DialogueConfig, LlmProvider, MockProvider, ModuleKind, ProviderError, ProviderRequest, ProviderResponse,
};
use sic_core::feedback::FeedbackConfig;
use sic_service::provider::{ChatProvider, DeltaSink, InProcess};
use sic_service::{CallPolicy, Engines, SessionService, Store, TurnRequest};
use tokio::sync::Semaphore;
use tower::ServiceExt;

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

/// Script lines in order with 4 s gaps and 6 s turns, as the client would
/// timestamp them.
pub fn script_turns() -> Vec<TurnRequest> {
    let mut clock = 0;
    let mut out = Vec::new();
    for (_, lines) in SCRIPT {
        for line in lines.iter() {
            clock += 4_000;
            let start = clock;
            clock += 6_000;
            out.push(TurnRequest { text: line.to_string(), start_ms: Some(start), end_ms: Some(clock) });
        }
    }
    out
}

pub fn engines() -> Engines {
    Engines::builtin(DialogueConfig::default(), FeedbackConfig::default())
}

pub fn service_with(store: Arc<dyn Store>, chat: Arc<dyn ChatProvider>, retries: u32) -> SessionService {
    SessionService::new(engines(), store, chat, CallPolicy::new(500, retries))
}

pub fn mock() -> Arc<dyn ChatProvider> {
    Arc::new(InProcess(MockProvider))
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    send_with(app, method, uri, body, &[]).await
}

pub async fn send_with(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
    headers: &[(&str, &str)],
) -> (StatusCode, Value) {
    let (status, bytes) = send_raw(app, method, uri, body, headers).await;
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).expect("json body") };
    (status, v)
}

pub async fn send_raw(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
    headers: &[(&str, &str)],
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

/// Fails the first `n` calls, then answers like the mock.
pub struct Flaky {
    pub remaining: AtomicU32,
    pub calls: AtomicU32,
}

impl Flaky {
    pub fn new(n: u32) -> Self {
        Self { remaining: AtomicU32::new(n), calls: AtomicU32::new(0) }
    }
}

#[async_trait]
impl ChatProvider for Flaky {
    async fn complete(&self, r: &ProviderRequest, d: Option<&DeltaSink>) -> Result<ProviderResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let left = self.remaining.load(Ordering::SeqCst);
        if left > 0 {
            self.remaining.store(left - 1, Ordering::SeqCst);
            if let Some(tx) = d {
                let _ = tx.send("partial ".into());
            }
            return Err(ProviderError::Unavailable("injected outage".into()));
        }
        InProcess(MockProvider).complete(r, d).await
    }
}

/// Counts calls and answers like the mock.
#[derive(Default)]
pub struct Counting {
    pub calls: AtomicU32,
}

#[async_trait]
impl ChatProvider for Counting {
    async fn complete(&self, r: &ProviderRequest, _d: Option<&DeltaSink>) -> Result<ProviderResponse, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        MockProvider.complete(r)
    }
}

/// Holds every call until a permit is released.
pub struct Gate {
    pub permits: Arc<Semaphore>,
    pub entered: Arc<Semaphore>,
}

impl Gate {
    pub fn new() -> Self {
        Self { permits: Arc::new(Semaphore::new(0)), entered: Arc::new(Semaphore::new(0)) }
    }
}

#[async_trait]
impl ChatProvider for Gate {
    async fn complete(&self, r: &ProviderRequest, _d: Option<&DeltaSink>) -> Result<ProviderResponse, ProviderError> {
        self.entered.add_permits(1);
        self.permits.acquire().await.unwrap().forget();
        MockProvider.complete(r)
    }
}

/// Never answers within any sensible timeout.
pub struct Stalled;

#[async_trait]
impl ChatProvider for Stalled {
    async fn complete(&self, _r: &ProviderRequest, _d: Option<&DeltaSink>) -> Result<ProviderResponse, ProviderError> {
        tokio::time::sleep(Duration::from_secs(3600)).await;
        unreachable!()
    }
}

/// Posts each module's script lines until that module ends, then moves on to
/// the next module's lines. Returns what was posted and the replies.
pub async fn drive(svc: &SessionService, id: uuid::Uuid) -> Vec<(TurnRequest, sic_service::TurnResponse)> {
    let mut clock = 0;
    let mut out = Vec::new();
    for (module, lines) in SCRIPT {
        for line in lines.iter() {
            clock += 4_000;
            let start = clock;
            clock += 6_000;
            let t = TurnRequest { text: line.to_string(), start_ms: Some(start), end_ms: Some(clock) };
            let r = svc.post_turn(id, t.clone(), None).await.unwrap();
            assert_eq!(r.module, *module);
            let end = r.signal.is_end();
            out.push((t, r));
            if end {
                break;
            }
        }
        clock += 1_000;
    }
    out
}
