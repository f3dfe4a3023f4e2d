use std::time::Duration;

use serde_json::Value;

pub struct HttpRequest<'a> {
    pub url: &'a str,
    /// Sent as `Authorization: Bearer ...`; never copied into the body.
    pub bearer: Option<&'a str>,
    pub body: &'a Value,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Network(String),
}

/// One JSON POST. Retries and status interpretation live in the client.
pub trait Transport: Send + Sync {
    fn post_json(&self, request: &HttpRequest<'_>) -> Result<HttpReply, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Self {
        Self { client: reqwest::blocking::Client::new() }
    }
}

impl Default for ReqwestTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for ReqwestTransport {
    fn post_json(&self, request: &HttpRequest<'_>) -> Result<HttpReply, TransportError> {
        let mut builder = self.client.post(request.url).timeout(request.timeout).json(request.body);
        if let Some(token) = request.bearer {
            builder = builder.bearer_auth(token);
        }
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Network(e.to_string())
            }
        };
        let response = builder.send().map_err(classify)?;
        let status = response.status().as_u16();
        let body = response.text().map_err(classify)?;
        Ok(HttpReply { status, body })
    }
}
