//! Completion-style text generation over HTTP JSON, with retries, a bounded
//! batch runner and a scripted mock backend.

mod mock;
mod transport;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use url::Url;

use crate::prompting::RenderedPrompt;

pub use mock::{MockFixture, MockRule, MockServer, RecordedRequest, ScriptedBackend, ScriptedFailure};
pub use transport::{HttpReply, HttpRequest, ReqwestTransport, Transport, TransportError};

pub const ENV_URL: &str = "AVTEXT_LLM_URL";
pub const ENV_MODEL: &str = "AVTEXT_LLM_MODEL";
pub const ENV_KEY: &str = "AVTEXT_LLM_KEY";

const BODY_EXCERPT_CHARS: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("backend returned HTTP {status}: {body}")]
    BackendError { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("backend rejected credentials (HTTP {0})")]
    AuthError(u16),
    #[error("invalid endpoint configuration: {0}")]
    InvalidConfig(String),
    #[error("prompt is empty")]
    EmptyPrompt,
}

impl LlmError {
    fn from_status(status: u16, body: &str) -> Self {
        match status {
            401 | 403 => LlmError::AuthError(status),
            _ => LlmError::BackendError { status, body: excerpt(body) },
        }
    }

    fn is_transient(&self) -> bool {
        match self {
            LlmError::Timeout | LlmError::Network(_) => true,
            LlmError::BackendError { status, .. } => *status == 429 || (500..600).contains(status),
            _ => false,
        }
    }
}

fn excerpt(body: &str) -> String {
    match body.char_indices().nth(BODY_EXCERPT_CHARS) {
        Some((idx, _)) => format!("{}...", &body[..idx]),
        None => body.to_string(),
    }
}

/// Sampling knobs. Defaults are temperature 0, top-k 5, 512 new tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_k: u32,
    pub max_new_tokens: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self { temperature: 0.0, top_k: 5, max_new_tokens: 512 }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::InvalidConfig(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.top_k == 0 || self.max_new_tokens == 0 {
            return Err(LlmError::InvalidConfig("top_k and max_new_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointConfig {
    pub base_url: Url,
    pub model_id: String,
    pub api_key: Option<ApiKey>,
    pub timeout: Duration,
    pub max_retries: u32,
    /// First retry waits about this long; each later retry doubles it.
    pub backoff_base: Duration,
}

impl EndpointConfig {
    pub fn new(base_url: &str, model_id: impl Into<String>) -> Result<Self, LlmError> {
        Ok(Self {
            base_url: parse_base_url(base_url)?,
            model_id: model_id.into(),
            api_key: None,
            timeout: Duration::from_secs(60),
            max_retries: 2,
            backoff_base: Duration::from_millis(500),
        })
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(ApiKey::new(key));
        self
    }

    /// Override fields from `AVTEXT_LLM_URL`, `AVTEXT_LLM_MODEL`, `AVTEXT_LLM_KEY`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), LlmError> {
        if let Some(url) = lookup(ENV_URL) {
            self.base_url = parse_base_url(&url)?;
        }
        if let Some(model) = lookup(ENV_MODEL) {
            self.model_id = model;
        }
        if let Some(key) = lookup(ENV_KEY) {
            self.api_key = Some(ApiKey::new(key));
        }
        Ok(())
    }

    pub fn endpoint(&self, path: &str) -> String {
        format!("{}/{}", self.base_url.as_str().trim_end_matches('/'), path)
    }
}

fn parse_base_url(raw: &str) -> Result<Url, LlmError> {
    let url = Url::parse(raw).map_err(|e| LlmError::InvalidConfig(format!("{raw:?}: {e}")))?;
    match url.scheme() {
        "http" | "https" => Ok(url),
        other => Err(LlmError::InvalidConfig(format!("unsupported scheme {other:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

impl FinishReason {
    fn from_wire(reason: Option<&str>) -> Self {
        match reason {
            None | Some("stop") | Some("eos") | Some("end_turn") => FinishReason::Stop,
            Some("length") | Some("max_tokens") => FinishReason::Length,
            Some(_) => FinishReason::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub finish_reason: FinishReason,
    pub latency: Duration,
    /// Attempts beyond the first.
    pub retries: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    text: String,
    finish_reason: Option<String>,
}

/// Shareable client. Blocking per call; `complete_batch` runs its own workers.
#[derive(Clone)]
pub struct LlmClient {
    transport: Arc<dyn Transport>,
}

impl fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmClient").finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn http() -> Self {
        Self::with_transport(Arc::new(ReqwestTransport::new()))
    }

    pub fn with_transport(transport: Arc<dyn Transport>) -> Self {
        Self { transport }
    }

    pub fn scripted(backend: ScriptedBackend) -> Self {
        Self::with_transport(Arc::new(backend))
    }

    /// POST `body` to `{base_url}/{path}` with retries. Returns the parsed
    /// JSON reply and the number of retries spent.
    pub fn post_json(&self, config: &EndpointConfig, path: &str, body: &Value) -> Result<(Value, u32), LlmError> {
        let url = config.endpoint(path);
        let request = HttpRequest {
            url: &url,
            bearer: config.api_key.as_ref().map(ApiKey::expose),
            body,
            timeout: config.timeout,
        };
        let mut attempt = 0;
        loop {
            let outcome = match self.transport.post_json(&request) {
                Ok(reply) if (200..300).contains(&reply.status) => {
                    return serde_json::from_str(&reply.body)
                        .map(|v| (v, attempt))
                        .map_err(|e| LlmError::MalformedResponse(e.to_string()));
                }
                Ok(reply) => LlmError::from_status(reply.status, &reply.body),
                Err(TransportError::Timeout) => LlmError::Timeout,
                Err(TransportError::Network(msg)) => LlmError::Network(msg),
            };
            if !outcome.is_transient() || attempt >= config.max_retries {
                return Err(outcome);
            }
            let wait = backoff_delay(config.backoff_base, attempt);
            tracing::warn!(%url, attempt, ?wait, error = %outcome, "retrying");
            std::thread::sleep(wait);
            attempt += 1;
        }
    }

    pub fn complete(
        &self,
        config: &EndpointConfig,
        params: &GenerationParams,
        prompt: &RenderedPrompt,
    ) -> Result<Completion, LlmError> {
        if prompt.text.is_empty() {
            return Err(LlmError::EmptyPrompt);
        }
        params.validate()?;
        let body = json!({
            "model": config.model_id,
            "prompt": prompt.text,
            "temperature": params.temperature,
            "top_k": params.top_k,
            "max_tokens": params.max_new_tokens,
        });
        let started = Instant::now();
        let (reply, retries) = self.post_json(config, "completions", &body)?;
        let parsed: CompletionResponse =
            serde_json::from_value(reply).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::MalformedResponse("no choices".into()))?;
        Ok(Completion {
            text: choice.text,
            finish_reason: FinishReason::from_wire(choice.finish_reason.as_deref()),
            latency: started.elapsed(),
            retries,
        })
    }

    /// Runs every prompt with at most `max_in_flight` requests outstanding.
    /// Results line up with `prompts`; a failed item does not stop the others.
    pub fn complete_batch(
        &self,
        config: &EndpointConfig,
        params: &GenerationParams,
        prompts: &[RenderedPrompt],
        max_in_flight: usize,
    ) -> Vec<Result<Completion, LlmError>> {
        let workers = max_in_flight.max(1).min(prompts.len());
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<Completion, LlmError>>>> =
            Mutex::new((0..prompts.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::SeqCst);
                    let Some(prompt) = prompts.get(idx) else { break };
                    let result = self.complete(config, params, prompt);
                    slots.lock().unwrap()[idx] = Some(result);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|slot| slot.expect("every index is visited"))
            .collect()
    }
}

/// `base * 2^attempt`, jittered by up to 20% either way.
pub fn backoff_delay(base: Duration, attempt: u32) -> Duration {
    let nominal = base.as_secs_f64() * 2f64.powi(attempt as i32);
    let jitter = rand::thread_rng().gen_range(0.8..=1.2);
    Duration::from_secs_f64(nominal * jitter)
}
