//! Scripted backend for tests and `--mock` runs. Completion requests are
//! matched against the final input section of the prompt; embedding requests
//! are answered by the deterministic hash embedder.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::transport::{HttpReply, HttpRequest, Transport, TransportError};
use crate::prompting::query_section;
use crate::retrieval::HashEmbedder;

/// One scripted answer. `equals` compares against the trimmed input section;
/// `contains` looks for a substring in it. A rule with neither always matches.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finish_reason: Option<String>,
    /// Reply with this HTTP status instead of a completion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ms: Option<u64>,
}

impl MockRule {
    pub fn equals(input: impl Into<String>, text: impl Into<String>) -> Self {
        Self { equals: Some(input.into()), text: text.into(), ..Self::default() }
    }

    pub fn contains(needle: impl Into<String>, text: impl Into<String>) -> Self {
        Self { contains: Some(needle.into()), text: text.into(), ..Self::default() }
    }

    fn matches(&self, section: &str) -> bool {
        let eq = self.equals.as_deref().is_none_or(|e| section.trim() == e.trim());
        let has = self.contains.as_deref().is_none_or(|c| section.contains(c));
        eq && has
    }
}

/// A failure served before any rule is consulted, one per request, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptedFailure {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    #[serde(default)]
    pub malformed: bool,
    #[serde(default)]
    pub timeout: bool,
}

impl ScriptedFailure {
    pub fn status(status: u16) -> Self {
        Self { status: Some(status), ..Self::default() }
    }

    pub fn malformed() -> Self {
        Self { malformed: true, ..Self::default() }
    }

    pub fn timeout() -> Self {
        Self { timeout: true, ..Self::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockFixture {
    #[serde(default)]
    pub completions: Vec<MockRule>,
    /// Used when no rule matches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
    /// Answer unmatched prompts with their own input section.
    #[serde(default)]
    pub echo: bool,
    #[serde(default)]
    pub failures: Vec<ScriptedFailure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_dim: Option<usize>,
}

impl MockFixture {
    pub fn single_contains(needle: &str, text: &str) -> Self {
        Self { completions: vec![MockRule::contains(needle, text)], ..Self::default() }
    }

    pub fn echo() -> Self {
        Self { echo: true, ..Self::default() }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub url: String,
    pub authorization: Option<String>,
    pub body: String,
}

struct Inner {
    fixture: MockFixture,
    failures: Mutex<VecDeque<ScriptedFailure>>,
    log: Mutex<Vec<RecordedRequest>>,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

#[derive(Clone)]
pub struct ScriptedBackend {
    inner: Arc<Inner>,
}

pub const DEFAULT_MOCK_EMBEDDING_DIM: usize = 64;

impl ScriptedBackend {
    pub fn new(fixture: MockFixture) -> Self {
        let failures = Mutex::new(fixture.failures.iter().cloned().collect());
        Self {
            inner: Arc::new(Inner {
                fixture,
                failures,
                log: Mutex::new(Vec::new()),
                in_flight: AtomicUsize::new(0),
                max_in_flight: AtomicUsize::new(0),
            }),
        }
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.inner.log.lock().unwrap().clone()
    }

    /// Highest number of concurrently open requests seen so far.
    pub fn max_in_flight(&self) -> usize {
        self.inner.max_in_flight.load(Ordering::SeqCst)
    }

    /// Serve one request. `Err` only for a scripted timeout.
    pub fn handle(&self, url: &str, authorization: Option<String>, body: &str) -> Result<HttpReply, TransportError> {
        let inner = &self.inner;
        inner.log.lock().unwrap().push(RecordedRequest {
            url: url.to_string(),
            authorization,
            body: body.to_string(),
        });
        let now = inner.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        inner.max_in_flight.fetch_max(now, Ordering::SeqCst);
        let reply = self.respond(url, body);
        inner.in_flight.fetch_sub(1, Ordering::SeqCst);
        reply
    }

    fn respond(&self, url: &str, body: &str) -> Result<HttpReply, TransportError> {
        let fixture = &self.inner.fixture;
        let failure = self.inner.failures.lock().unwrap().pop_front();
        if let Some(failure) = failure {
            if failure.timeout {
                return Err(TransportError::Timeout);
            }
            if failure.malformed {
                return Ok(HttpReply { status: 200, body: "{\"choices\": [".into() });
            }
            let status = failure.status.unwrap_or(500);
            return Ok(HttpReply { status, body: format!("scripted failure {status}") });
        }
        let Ok(request) = serde_json::from_str::<Value>(body) else {
            return Ok(HttpReply { status: 400, body: "request body is not JSON".into() });
        };
        if url.ends_with("/embeddings") {
            let embedder = HashEmbedder::new(fixture.embedding_dim.unwrap_or(DEFAULT_MOCK_EMBEDDING_DIM));
            let Some(inputs) = request["input"].as_array() else {
                return Ok(HttpReply { status: 400, body: "missing input".into() });
            };
            let data: Vec<Value> = inputs
                .iter()
                .map(|t| json!({ "embedding": embedder.embed_raw(t.as_str().unwrap_or_default()) }))
                .collect();
            return Ok(ok_json(json!({ "data": data })));
        }
        let prompt = request["prompt"].as_str().unwrap_or_default();
        let section = query_section(prompt);
        let (text, finish_reason) = match fixture.completions.iter().find(|r| r.matches(section)) {
            Some(rule) => {
                if let Some(ms) = rule.delay_ms {
                    std::thread::sleep(Duration::from_millis(ms));
                }
                if let Some(status) = rule.status {
                    return Ok(HttpReply { status, body: format!("scripted status {status}") });
                }
                (rule.text.clone(), rule.finish_reason.clone().unwrap_or_else(|| "stop".into()))
            }
            None => match (&fixture.default, fixture.echo) {
                (Some(text), _) => (text.clone(), "stop".into()),
                (None, true) => (section.to_string(), "stop".into()),
                (None, false) => return Ok(HttpReply { status: 404, body: "no scripted response".into() }),
            },
        };
        Ok(ok_json(json!({ "choices": [{ "text": text, "finish_reason": finish_reason }] })))
    }
}

fn ok_json(value: Value) -> HttpReply {
    HttpReply { status: 200, body: value.to_string() }
}

impl Transport for ScriptedBackend {
    fn post_json(&self, request: &HttpRequest<'_>) -> Result<HttpReply, TransportError> {
        self.handle(request.url, request.bearer.map(|t| format!("Bearer {t}")), &request.body.to_string())
    }
}

/// The scripted backend behind a real loopback HTTP listener.
pub struct MockServer {
    server: Arc<tiny_http::Server>,
    base_url: String,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(backend: ScriptedBackend) -> std::io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let port = server.server_addr().to_ip().map(|a| a.port()).unwrap_or_default();
        let server = Arc::new(server);
        let accept = Arc::clone(&server);
        let worker = std::thread::spawn(move || {
            for mut request in accept.incoming_requests() {
                let backend = backend.clone();
                std::thread::spawn(move || {
                    let mut body = String::new();
                    let _ = request.as_reader().read_to_string(&mut body);
                    let auth = request
                        .headers()
                        .iter()
                        .find(|h| h.field.equiv("Authorization"))
                        .map(|h| h.value.to_string());
                    let url = request.url().to_string();
                    let reply = backend
                        .handle(&url, auth, &body)
                        .unwrap_or(HttpReply { status: 504, body: "scripted timeout".into() });
                    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let response = tiny_http::Response::from_string(reply.body)
                        .with_status_code(reply.status)
                        .with_header(header);
                    let _ = request.respond(response);
                });
            }
        });
        Ok(Self { server, base_url: format!("http://127.0.0.1:{port}/v1"), worker: Some(worker) })
    }

    /// e.g. `http://127.0.0.1:PORT/v1`
    pub fn base_url(&self) -> &str {
        &self.base_url
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}
