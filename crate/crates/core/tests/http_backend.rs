//! The real HTTP transport against the scripted backend on a loopback port.

use std::path::Path;
use std::time::Duration;

use avtext::extractors::LlmExtractor;
use avtext::llm_client::{
    EndpointConfig, GenerationParams, LlmClient, LlmError, MockFixture, MockRule, MockServer, ScriptedBackend,
    ScriptedFailure,
};
use avtext::prompting::{render, TemplateRegistry};
use avtext::retrieval::{embed, HashEmbedder};

fn config(server: &MockServer) -> EndpointConfig {
    let mut cfg = EndpointConfig::new(server.base_url(), "aviation-mistral-7b").unwrap();
    cfg.backoff_base = Duration::from_millis(5);
    cfg.timeout = Duration::from_secs(5);
    cfg
}

fn reference_backend() -> ScriptedBackend {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/reference_mock.json");
    ScriptedBackend::new(MockFixture::load(&path).unwrap())
}

#[test]
fn completion_over_http_with_retry_and_auth() {
    let mut fixture = MockFixture::single_contains("SH", "Shower");
    fixture.failures = vec![ScriptedFailure::status(503)];
    let backend = ScriptedBackend::new(fixture);
    let server = MockServer::start(backend.clone()).unwrap();
    let cfg = config(&server).with_api_key("secret-token");
    let registry = TemplateRegistry::builtin();
    let prompt = render(registry.get_template("metar_decode").unwrap(), "SH").unwrap();

    let out = LlmClient::http().complete(&cfg, &GenerationParams::default(), &prompt).unwrap();
    assert_eq!(out.text, "Shower");
    assert_eq!(out.retries, 1);

    let requests = backend.requests();
    assert_eq!(requests.len(), 2);
    assert!(requests[0].url.ends_with("/completions"));
    assert_eq!(requests[1].authorization.as_deref(), Some("Bearer secret-token"));
    let body: serde_json::Value = serde_json::from_str(&requests[1].body).unwrap();
    assert_eq!(body["model"], "aviation-mistral-7b");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["top_k"], 5);
    assert_eq!(body["max_tokens"], 512);
    assert_eq!(body["prompt"], prompt.text);
}

#[test]
fn auth_and_client_errors_are_not_retried() {
    let fixture = MockFixture {
        completions: vec![
            MockRule { status: Some(401), ..MockRule::contains("locked", "") },
            MockRule { status: Some(400), ..MockRule::contains("bad", "") },
        ],
        ..MockFixture::default()
    };
    let backend = ScriptedBackend::new(fixture);
    let server = MockServer::start(backend.clone()).unwrap();
    let cfg = config(&server);
    let registry = TemplateRegistry::builtin();
    let template = registry.get_template("metar_decode").unwrap();
    let client = LlmClient::http();

    let err = client.complete(&cfg, &GenerationParams::default(), &render(template, "locked").unwrap()).unwrap_err();
    assert!(matches!(err, LlmError::AuthError(401)), "{err:?}");
    let err = client.complete(&cfg, &GenerationParams::default(), &render(template, "bad").unwrap()).unwrap_err();
    assert!(matches!(err, LlmError::BackendError { status: 400, .. }), "{err:?}");
    assert_eq!(backend.requests().len(), 2);
}

#[test]
fn persistent_server_errors_exhaust_retries() {
    let mut fixture = MockFixture::echo();
    fixture.failures = vec![ScriptedFailure::status(500); 3];
    let server = MockServer::start(ScriptedBackend::new(fixture)).unwrap();
    let cfg = config(&server);
    let registry = TemplateRegistry::builtin();
    let prompt = render(registry.get_template("metar_decode").unwrap(), "FG").unwrap();
    let err = LlmClient::http().complete(&cfg, &GenerationParams::default(), &prompt).unwrap_err();
    assert!(matches!(err, LlmError::BackendError { status: 500, .. }), "{err:?}");
}

#[test]
fn unreachable_backend_is_a_network_error() {
    let port = {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let mut cfg = EndpointConfig::new(&format!("http://127.0.0.1:{port}/v1"), "m").unwrap();
    cfg.max_retries = 0;
    let registry = TemplateRegistry::builtin();
    let prompt = render(registry.get_template("metar_decode").unwrap(), "SH").unwrap();
    let err = LlmClient::http().complete(&cfg, &GenerationParams::default(), &prompt).unwrap_err();
    assert!(matches!(err, LlmError::Network(_) | LlmError::Timeout), "{err:?}");
}

#[test]
fn datis_sample_over_http() {
    let backend = reference_backend();
    let server = MockServer::start(backend.clone()).unwrap();
    let cfg = config(&server);
    let registry = TemplateRegistry::builtin();
    let client = LlmClient::http();
    let extractor = LlmExtractor::new(&client, &cfg, &registry);
    let answer = extractor.extract_datis(r"LOC RY 31 APCH IN USE LAND RY 31. \nDEPART RY 31.", "datis_arr_dep_runways").unwrap();
    assert_eq!(answer.arrival.to_string(), "31");
    assert_eq!(answer.departure.to_string(), "31");
}

#[test]
fn embeddings_over_http() {
    let server = MockServer::start(ScriptedBackend::new(MockFixture { embedding_dim: Some(32), ..MockFixture::default() })).unwrap();
    let cfg = config(&server);
    let texts = vec!["runway closed".to_string(), "ground stop".to_string()];
    let vectors = embed(&LlmClient::http(), &cfg, &texts, None).unwrap();
    assert_eq!(vectors.len(), 2);
    assert_eq!(vectors[0], HashEmbedder::new(32).embed("runway closed"));
}
