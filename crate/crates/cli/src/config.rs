//! Settings resolved from flags, environment, a key-value config file and
//! built-in defaults, in that order of precedence.
//!
//! Config file format, one `key = value` per line, `#` starts a comment:
//!
//! ```text
//! llm.url = http://127.0.0.1:8000/v1
//! llm.model = aviation-mistral-7b
//! llm.timeout_secs = 60
//! gen.top_k = 5
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use avtext::llm_client::{EndpointConfig, GenerationParams, ENV_KEY, ENV_MODEL, ENV_URL};

pub const ENV_CONFIG: &str = "AVTEXT_CONFIG";
pub const ENV_EMBED_URL: &str = "AVTEXT_EMBED_URL";
pub const ENV_EMBED_MODEL: &str = "AVTEXT_EMBED_MODEL";

pub const DEFAULT_URL: &str = "http://127.0.0.1:8000/v1";
pub const DEFAULT_MODEL: &str = "aviation-mistral-7b";
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

/// Recognized keys and the environment variable that may set each.
pub const KEYS: [(&str, Option<&str>); 11] = [
    ("llm.url", Some(ENV_URL)),
    ("llm.model", Some(ENV_MODEL)),
    ("llm.api_key", Some(ENV_KEY)),
    ("llm.timeout_secs", None),
    ("llm.max_retries", None),
    ("embed.url", Some(ENV_EMBED_URL)),
    ("embed.model", Some(ENV_EMBED_MODEL)),
    ("gen.temperature", None),
    ("gen.top_k", None),
    ("gen.max_new_tokens", None),
    ("max_in_flight", None),
];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{path}:{line}: {reason}")]
    File { path: String, line: usize, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("invalid value for {key}: {reason}")]
    Value { key: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub endpoint: EndpointConfig,
    pub params: GenerationParams,
    pub embed_endpoint: EndpointConfig,
    pub max_in_flight: usize,
    /// Named file locations given on the command line (`out`, `mock`, ...).
    pub paths: BTreeMap<String, PathBuf>,
}

pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read { path: display.clone(), reason: e.to_string() })?;
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| ConfigError::File { path: display.clone(), line: idx + 1, reason };
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(err(format!("unknown key {key:?}")));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Merge the layers: `flags` over environment over `file`.
pub fn layer(
    flags: &BTreeMap<String, String>,
    env: &dyn Fn(&str) -> Option<String>,
    file: &BTreeMap<String, String>,
) -> BTreeMap<String, String> {
    let mut merged = file.clone();
    for (key, var) in KEYS {
        if let Some(value) = var.and_then(env) {
            merged.insert(key.to_string(), value);
        }
    }
    merged.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));
    merged
}

fn parsed<T: std::str::FromStr>(settings: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    settings
        .get(key)
        .map(|v| v.parse::<T>().map_err(|e| ConfigError::Value { key: key.into(), reason: e.to_string() }))
        .transpose()
}

/// Build the typed configuration from merged settings, filling defaults.
pub fn resolve(settings: &BTreeMap<String, String>, paths: BTreeMap<String, PathBuf>) -> Result<CliConfig, ConfigError> {
    fn invalid(key: &'static str) -> impl Fn(avtext::llm_client::LlmError) -> ConfigError {
        move |e| ConfigError::Value { key: key.into(), reason: e.to_string() }
    }
    let url = settings.get("llm.url").map_or(DEFAULT_URL, String::as_str);
    let model = settings.get("llm.model").map_or(DEFAULT_MODEL, String::as_str);
    let mut endpoint = EndpointConfig::new(url, model).map_err(invalid("llm.url"))?;
    if let Some(key) = settings.get("llm.api_key") {
        endpoint = endpoint.with_api_key(key.clone());
    }
    if let Some(secs) = parsed::<u64>(settings, "llm.timeout_secs")? {
        endpoint.timeout = Duration::from_secs(secs);
    }
    if let Some(retries) = parsed::<u32>(settings, "llm.max_retries")? {
        endpoint.max_retries = retries;
    }

    let mut embed_endpoint = endpoint.clone();
    if let Some(url) = settings.get("embed.url") {
        embed_endpoint.base_url = EndpointConfig::new(url, model).map_err(invalid("embed.url"))?.base_url;
    }
    if let Some(model) = settings.get("embed.model") {
        embed_endpoint.model_id = model.clone();
    }

    let mut params = GenerationParams::default();
    if let Some(t) = parsed(settings, "gen.temperature")? {
        params.temperature = t;
    }
    if let Some(k) = parsed(settings, "gen.top_k")? {
        params.top_k = k;
    }
    if let Some(n) = parsed(settings, "gen.max_new_tokens")? {
        params.max_new_tokens = n;
    }
    params.validate().map_err(|e| ConfigError::Value { key: "gen".into(), reason: e.to_string() })?;

    let max_in_flight = parsed::<usize>(settings, "max_in_flight")?.unwrap_or(DEFAULT_MAX_IN_FLIGHT);
    if max_in_flight == 0 {
        return Err(ConfigError::Value { key: "max_in_flight".into(), reason: "must be at least 1".into() });
    }
    Ok(CliConfig { endpoint, params, embed_endpoint, max_in_flight, paths })
}
