//! Async provider clients. Each call here is one attempt; timeouts, retries and
//! the audit trail are handled by the caller.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Duration;

use async_trait::async_trait;
use futures::StreamExt;
use serde::Deserialize;
use serde_json::{json, Value};
use sic_core::dialogue::{ChatRole, LlmProvider, PersonaFacts, ProviderError, ProviderRequest, ProviderResponse};
use sic_core::skill::SkillLabel;
use tokio::sync::mpsc;

use crate::config::{ClassifierConfig, ProviderConfig};

/// Receives reply text fragments while a provider streams.
pub type DeltaSink = mpsc::UnboundedSender<String>;

#[async_trait]
pub trait ChatProvider: Send + Sync {
    /// One completion attempt. Text fragments go to `deltas` as they arrive;
    /// the returned response always carries the full text.
    async fn complete(
        &self,
        request: &ProviderRequest,
        deltas: Option<&DeltaSink>,
    ) -> Result<ProviderResponse, ProviderError>;
}

/// Optional skill model consulted next to the lexicon rules.
#[async_trait]
pub trait SkillModel: Send + Sync {
    async fn labels(&self, utterance: &str) -> Result<BTreeSet<SkillLabel>, ProviderError>;
}

/// Runs a cheap blocking provider (the mock, or an always-failing one) on the
/// calling task. Successful replies are forwarded to the sink word by word.
#[derive(Debug, Clone, Default)]
pub struct InProcess<P>(pub P);

#[async_trait]
impl<P: LlmProvider + Send + Sync> ChatProvider for InProcess<P> {
    async fn complete(
        &self,
        request: &ProviderRequest,
        deltas: Option<&DeltaSink>,
    ) -> Result<ProviderResponse, ProviderError> {
        let r = self.0.complete(request)?;
        if let Some(tx) = deltas {
            for piece in r.text.split_inclusive(' ') {
                let _ = tx.send(piece.to_string());
            }
        }
        Ok(r)
    }
}

fn token_from_env(var: Option<&str>) -> Option<String> {
    var.and_then(|v| std::env::var(v).ok()).filter(|t| !t.is_empty())
}

fn transport_error(e: reqwest::Error) -> ProviderError {
    if e.is_timeout() {
        ProviderError::Timeout
    } else {
        ProviderError::Unavailable(e.to_string())
    }
}

async fn check_status(resp: reqwest::Response) -> Result<reqwest::Response, ProviderError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let body = resp.text().await.unwrap_or_default();
    let body: String = body.chars().take(200).collect();
    Err(ProviderError::Unavailable(format!("status {status}: {body}")))
}

/// Persona facts as plain lines for the system message.
pub fn persona_block(p: &PersonaFacts) -> String {
    let mut s = String::from("Persona:");
    let _ = write!(
        s,
        "\nName: {}\nAge: {}\nSex: {}\nDiagnosis: {}\nPrognosis without treatment: {}\nPrognosis with treatment: {}",
        p.name, p.age, p.sex, p.diagnosis, p.prognosis_without_treatment, p.prognosis_with_treatment
    );
    for d in &p.details {
        let _ = write!(s, "\n- {d}");
    }
    s
}

/// OpenAI-style chat-completions body.
pub fn chat_body(model: &str, request: &ProviderRequest, stream: bool) -> Value {
    let mut system = request.system_instructions.clone();
    if let Some(p) = &request.persona {
        system.push_str("\n\n");
        system.push_str(&persona_block(p));
    }
    let mut messages = vec![json!({ "role": "system", "content": system })];
    messages.extend(request.messages.iter().map(|m| {
        let role = match m.role {
            ChatRole::User => "user",
            ChatRole::Assistant => "assistant",
        };
        json!({ "role": role, "content": m.content })
    }));
    json!({ "model": model, "messages": messages, "stream": stream })
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    #[serde(default)]
    message: Option<Message>,
    #[serde(default)]
    delta: Option<Message>,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

fn invalid(e: impl std::fmt::Display) -> ProviderError {
    ProviderError::InvalidResponse(e.to_string())
}

/// Chat-completions client over HTTP.
#[derive(Debug, Clone)]
pub struct HttpChat {
    client: reqwest::Client,
    endpoint: String,
    model: String,
    token: Option<String>,
    stream: bool,
}

impl HttpChat {
    pub fn new(config: &ProviderConfig) -> Result<Self, ProviderError> {
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| ProviderError::Unavailable("no provider endpoint configured".into()))?;
        let client = reqwest::Client::builder()
            .timeout(config.timeout())
            .build()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        Ok(Self {
            client,
            endpoint,
            model: config.model.clone(),
            token: token_from_env(config.token_env.as_deref()),
            stream: config.stream,
        })
    }

    async fn read_stream(resp: reqwest::Response, deltas: Option<&DeltaSink>) -> Result<String, ProviderError> {
        let mut body = resp.bytes_stream();
        let mut buf = Vec::new();
        let mut text = String::new();
        'read: while let Some(chunk) = body.next().await {
            buf.extend_from_slice(&chunk.map_err(transport_error)?);
            while let Some(nl) = buf.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = buf.drain(..=nl).collect();
                let line = String::from_utf8_lossy(&line);
                let Some(data) = line.trim().strip_prefix("data:") else { continue };
                let data = data.trim();
                if data == "[DONE]" {
                    break 'read;
                }
                let c: Completion = serde_json::from_str(data).map_err(invalid)?;
                let piece = c
                    .choices
                    .into_iter()
                    .next()
                    .and_then(|ch| ch.delta.or(ch.message))
                    .and_then(|m| m.content)
                    .unwrap_or_default();
                if !piece.is_empty() {
                    if let Some(tx) = deltas {
                        let _ = tx.send(piece.clone());
                    }
                    text.push_str(&piece);
                }
            }
        }
        Ok(text)
    }
}

#[async_trait]
impl ChatProvider for HttpChat {
    async fn complete(
        &self,
        request: &ProviderRequest,
        deltas: Option<&DeltaSink>,
    ) -> Result<ProviderResponse, ProviderError> {
        let mut req = self.client.post(&self.endpoint).json(&chat_body(&self.model, request, self.stream));
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = check_status(req.send().await.map_err(transport_error)?).await?;
        let text = if self.stream {
            Self::read_stream(resp, deltas).await?
        } else {
            let c: Completion = resp.json().await.map_err(invalid)?;
            let text = c
                .choices
                .into_iter()
                .next()
                .and_then(|ch| ch.message)
                .and_then(|m| m.content)
                .ok_or_else(|| invalid("no choices[0].message.content"))?;
            if let Some(tx) = deltas {
                let _ = tx.send(text.clone());
            }
            text
        };
        Ok(ProviderResponse { text: text.trim().to_string(), emotion_hint: None })
    }
}

/// Skill model over HTTP: `{"text": ...}` in, `{"labels": [...]}` out.
#[derive(Debug, Clone)]
pub struct HttpSkillModel {
    client: reqwest::Client,
    endpoint: String,
    token: Option<String>,
}

impl HttpSkillModel {
    pub fn new(config: &ClassifierConfig) -> Result<Self, ProviderError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        Ok(Self { client, endpoint: config.endpoint.clone(), token: token_from_env(config.token_env.as_deref()) })
    }
}

#[derive(Deserialize)]
struct LabelsBody {
    labels: Vec<String>,
}

#[async_trait]
impl SkillModel for HttpSkillModel {
    async fn labels(&self, utterance: &str) -> Result<BTreeSet<SkillLabel>, ProviderError> {
        let mut req = self.client.post(&self.endpoint).json(&json!({ "text": utterance }));
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = check_status(req.send().await.map_err(transport_error)?).await?;
        let body: LabelsBody = resp.json().await.map_err(invalid)?;
        body.labels.iter().map(|l| l.parse::<SkillLabel>().map_err(invalid)).collect()
    }
}
