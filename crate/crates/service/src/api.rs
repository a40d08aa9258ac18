use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::{Deserialize, Serialize};
use sic_core::dialogue::ModuleKind;
use sic_core::feedback::render_html;
use tokio::sync::mpsc;
use uuid::Uuid;

use crate::record::SessionArchive;
use crate::session::{CreateSession, ServiceError, SessionService, TurnEvent, TurnRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

pub enum ApiError {
    Service(ServiceError),
    BadRequest(String),
    Unauthorized,
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError::Service(e)
    }
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::SessionEnded => "session_ended",
            ServiceError::TurnInFlight => "turn_in_flight",
            ServiceError::ModuleNotEnded(_) => "module_not_ended",
            ServiceError::ModuleNotInPlan(_) => "module_not_in_plan",
            ServiceError::InvalidPlan(_) => "invalid_plan",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::SessionExists(_) => "session_exists",
            ServiceError::Storage(_) => "storage",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::ModuleNotInPlan(_) => StatusCode::NOT_FOUND,
            ServiceError::SessionEnded
            | ServiceError::TurnInFlight
            | ServiceError::ModuleNotEnded(_)
            | ServiceError::SessionExists(_) => StatusCode::CONFLICT,
            ServiceError::InvalidPlan(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Storage(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { error: self.code().into(), message: self.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Service(e) => {
                if e.status().is_server_error() {
                    tracing::error!(error = %e, "request failed");
                }
                (e.status(), e.body())
            }
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, ErrorBody { error: "invalid_request".into(), message: m }),
            ApiError::Unauthorized => (
                StatusCode::UNAUTHORIZED,
                ErrorBody { error: "unauthorized".into(), message: "missing or wrong API key".into() },
            ),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Clone)]
struct AppState {
    service: Arc<SessionService>,
    api_key: Option<Arc<str>>,
}

/// All routes. `/v1` requires `api_key` (bearer token or `x-api-key`) when set.
pub fn router(service: Arc<SessionService>, api_key: Option<String>) -> Router {
    let state = AppState { service, api_key: api_key.map(Into::into) };
    let v1 = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/turns", post(post_turn))
        .route("/sessions/{id}/feedback/{module}", get(get_feedback))
        .route("/sessions/{id}/export", get(export_session))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_key));
    Router::new().route("/healthz", get(healthz)).nest("/v1", v1).with_state(state)
}

fn keys_match(given: &[u8], want: &[u8]) -> bool {
    given.len() == want.len() && given.iter().zip(want).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

async fn require_key(State(st): State<AppState>, req: Request, next: Next) -> Result<Response, ApiError> {
    let Some(want) = &st.api_key else { return Ok(next.run(req).await) };
    let h = req.headers();
    let given = h
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .or_else(|| h.get("x-api-key").and_then(|v| v.to_str().ok()));
    match given {
        Some(k) if keys_match(k.as_bytes(), want.as_bytes()) => Ok(next.run(req).await),
        _ => Err(ApiError::Unauthorized),
    }
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

fn parse_id(s: &str) -> Result<Uuid, ApiError> {
    s.parse().map_err(|_| ApiError::BadRequest(format!("not a session id: {s:?}")))
}

/// JSON body; an empty body means the type's default when `D` allows it.
fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes, empty: Option<T>) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        if let Some(d) = empty {
            return Ok(d);
        }
    }
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("body: {e}")))
}

async fn create_session(State(st): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSession = parse_body(&body, Some(CreateSession::default()))?;
    let view = st.service.create(req).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn import_session(State(st): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let archive: SessionArchive = parse_body(&body, None)?;
    let view = st.service.import(archive).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(st.service.get(parse_id(&id)?).await?))
}

fn wants_stream(headers: &HeaderMap) -> bool {
    headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("text/event-stream"))
}

fn json_event(name: &str, value: &impl Serialize) -> Event {
    Event::default().event(name).json_data(value).expect("event payload serializes")
}

async fn post_turn(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let req: TurnRequest = parse_body(&body, None)?;
    if !wants_stream(&headers) {
        return Ok(Json(st.service.post_turn(id, req, None).await?).into_response());
    }
    Ok(Sse::new(turn_stream(st.service, id, req)).keep_alive(KeepAlive::default()).into_response())
}

enum Msg {
    Progress(TurnEvent),
    Done(Result<crate::session::TurnResponse, ServiceError>),
}

/// Events `labels`, `delta` and `retry` while the turn runs, then one `turn`
/// or `error`. The turn runs to completion and is persisted even if the
/// client goes away.
fn turn_stream(
    service: Arc<SessionService>,
    id: Uuid,
    req: TurnRequest,
) -> impl Stream<Item = Result<Event, Infallible>> {
    let (tx, rx) = mpsc::unbounded_channel::<Msg>();
    tokio::spawn(async move {
        let (etx, mut erx) = mpsc::unbounded_channel();
        let fwd_tx = tx.clone();
        let forward = tokio::spawn(async move {
            while let Some(e) = erx.recv().await {
                let _ = fwd_tx.send(Msg::Progress(e));
            }
        });
        let result = service.post_turn(id, req, Some(etx)).await;
        let _ = forward.await;
        let _ = tx.send(Msg::Done(result));
    });
    stream::unfold(Some(rx), |rx| async move {
        let mut rx = rx?;
        let msg = rx.recv().await?;
        let (event, last) = match msg {
            Msg::Progress(TurnEvent::Classified(labels)) => (json_event("labels", &labels), false),
            Msg::Progress(TurnEvent::Delta(text)) => (json_event("delta", &serde_json::json!({ "text": text })), false),
            Msg::Progress(TurnEvent::Retry { attempt }) => {
                (json_event("retry", &serde_json::json!({ "attempt": attempt })), false)
            }
            Msg::Done(Ok(resp)) => (json_event("turn", &resp), true),
            Msg::Done(Err(e)) => (json_event("error", &e.body()), true),
        };
        Some((Ok(event), if last { None } else { Some(rx) }))
    })
}

#[derive(Debug, Deserialize)]
struct FeedbackQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn get_feedback(
    State(st): State<AppState>,
    Path((id, module)): Path<(String, String)>,
    Query(q): Query<FeedbackQuery>,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let module: ModuleKind = module.parse().map_err(ApiError::BadRequest)?;
    let report = st.service.feedback(id, module).await?;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(report).into_response()),
        Some("html") => Ok(Html(render_html(&report)).into_response()),
        Some(other) => Err(ApiError::BadRequest(format!("unknown format {other:?}"))),
    }
}

async fn export_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(st.service.export(parse_id(&id)?).await?))
}
