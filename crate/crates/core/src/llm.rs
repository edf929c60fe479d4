//! Chat-completion transport with a content-addressed record/replay cache.
//!
//! Every exchange is stored as one JSON file named after the SHA-256 of the
//! request (model, system text, user text, temperature). In replay mode the
//! cache is the only source of responses, which makes whole-corpus runs
//! reproducible offline.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::parse::count_tokens;

pub const ENV_ENDPOINT: &str = "WRAC_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "WRAC_LLM_API_KEY";
pub const ENV_MODE: &str = "WRAC_LLM_MODE";
pub const ENV_MODEL: &str = "WRAC_LLM_MODEL";
pub const ENV_CACHE_DIR: &str = "WRAC_LLM_CACHE_DIR";

pub const DEFAULT_MODEL: &str = "gpt-4.1";

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("planner unavailable: no cached exchange for key {key}")]
    PlannerUnavailable { key: String },
    #[error("transport error (status {status:?}): {message}")]
    Transport { status: Option<u16>, message: String },
    #[error("malformed provider response: {0}")]
    Provider(String),
    #[error("no endpoint configured (set {ENV_ENDPOINT})")]
    NotConfigured,
    #[error("cache error at {path}: {message}")]
    Cache { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
}

impl ChatRequest {
    /// A planning request: temperature is always 0.
    pub fn planning(model: impl Into<String>, system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            system: system.into(),
            user: user.into(),
            temperature: 0.0,
        }
    }

    pub fn cache_key(&self) -> CacheKey {
        CacheKey::of(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cached_tokens: u64,
}

impl Usage {
    pub fn estimate(request: &ChatRequest, response: &str) -> Self {
        Self {
            input_tokens: (count_tokens(&request.system) + count_tokens(&request.user)) as u64,
            output_tokens: count_tokens(response) as u64,
            cached_tokens: 0,
        }
    }
}

impl std::ops::Add for Usage {
    type Output = Usage;

    fn add(self, rhs: Usage) -> Usage {
        Usage {
            input_tokens: self.input_tokens + rhs.input_tokens,
            output_tokens: self.output_tokens + rhs.output_tokens,
            cached_tokens: self.cached_tokens + rhs.cached_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request: ChatRequest,
    pub response_text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

/// Hex SHA-256 over a length-prefixed encoding of the request fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey(pub String);

impl CacheKey {
    pub fn of(request: &ChatRequest) -> Self {
        let mut hasher = Sha256::new();
        let temperature = request.temperature.to_bits().to_be_bytes();
        for field in [
            request.model.as_bytes(),
            request.system.as_bytes(),
            request.user.as_bytes(),
            &temperature[..],
        ] {
            hasher.update((field.len() as u64).to_be_bytes());
            hasher.update(field);
        }
        CacheKey(hex::encode(hasher.finalize()))
    }
}

impl std::fmt::Display for CacheKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Anything that can answer a chat request.
pub trait ChatModel: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatExchange, LlmError>;
}

impl<T: ChatModel + ?Sized> ChatModel for &T {
    fn complete(&self, request: &ChatRequest) -> Result<ChatExchange, LlmError> {
        (**self).complete(request)
    }
}

/// What a provider sends back for one request.
#[derive(Debug, Clone)]
pub struct ProviderReply {
    pub text: String,
    pub usage: Option<Usage>,
}

/// The network side of a [`CachedClient`].
pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<ProviderReply, LlmError>;
}

/// POSTs chat-completions-shaped JSON to an HTTP endpoint.
pub struct HttpTransport {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| LlmError::Transport {
                status: None,
                message: e.to_string(),
            })?;
        Ok(Self {
            endpoint: endpoint.into(),
            api_key,
            client,
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<ProviderReply, LlmError> {
        let body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let mut builder = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| LlmError::Transport {
            status: e.status().map(|s| s.as_u16()),
            message: e.to_string(),
        })?;
        let status = response.status();
        let text = response.text().map_err(|e| LlmError::Transport {
            status: Some(status.as_u16()),
            message: e.to_string(),
        })?;
        if !status.is_success() {
            return Err(LlmError::Transport {
                status: Some(status.as_u16()),
                message: text,
            });
        }
        parse_provider_body(&text)
    }
}

/// Extracts content and usage from a chat-completions response body.
pub fn parse_provider_body(body: &str) -> Result<ProviderReply, LlmError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| LlmError::Provider(e.to_string()))?;
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .ok_or_else(|| LlmError::Provider("missing choices[0].message.content".into()))?
        .to_string();
    let usage = value.get("usage").and_then(|u| {
        let input = u.get("prompt_tokens")?.as_u64()?;
        let output = u.get("completion_tokens")?.as_u64()?;
        let cached = u
            .pointer("/prompt_tokens_details/cached_tokens")
            .and_then(|c| c.as_u64())
            .unwrap_or(0)
            .min(input);
        Some(Usage {
            input_tokens: input,
            output_tokens: output,
            cached_tokens: cached,
        })
    });
    Ok(ProviderReply { text, usage })
}

/// Directory of one JSON file per [`CacheKey`].
#[derive(Debug, Clone)]
pub struct ReplayCache {
    dir: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl ReplayCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &CacheKey) -> Result<Option<ChatExchange>, LlmError> {
        let path = self.path(key);
        match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| LlmError::Cache {
                    path,
                    message: e.to_string(),
                }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(LlmError::Cache {
                path,
                message: e.to_string(),
            }),
        }
    }

    /// Stores an exchange atomically: write a temp file, then rename.
    pub fn put(&self, exchange: &ChatExchange) -> Result<CacheKey, LlmError> {
        let key = exchange.request.cache_key();
        let path = self.path(&key);
        let err = |message: String| LlmError::Cache {
            path: path.clone(),
            message,
        };
        std::fs::create_dir_all(&self.dir).map_err(|e| err(e.to_string()))?;
        let tmp = self.dir.join(format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let bytes = serde_json::to_vec_pretty(exchange).map_err(|e| err(e.to_string()))?;
        std::fs::write(&tmp, bytes).map_err(|e| err(e.to_string()))?;
        std::fs::rename(&tmp, &path).map_err(|e| err(e.to_string()))?;
        Ok(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmMode {
    /// Serve from cache; on a miss call the endpoint and store the exchange.
    Record,
    /// Serve from cache only.
    Replay,
    /// Always call the endpoint; never touch the cache.
    Live,
}

impl FromStr for LlmMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "record" => Ok(LlmMode::Record),
            "replay" => Ok(LlmMode::Replay),
            "live" => Ok(LlmMode::Live),
            other => Err(format!("unknown mode {other:?} (expected record, replay or live)")),
        }
    }
}

/// Counting semaphore bounding concurrent network calls.
struct Permits {
    free: Mutex<usize>,
    cond: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cond: Condvar::new(),
        }
    }

    fn run<R>(&self, f: impl FnOnce() -> R) -> R {
        {
            let mut free = self.free.lock().expect("permit lock");
            while *free == 0 {
                free = self.cond.wait(free).expect("permit lock");
            }
            *free -= 1;
        }
        let out = f();
        *self.free.lock().expect("permit lock") += 1;
        self.cond.notify_one();
        out
    }
}

/// A [`ChatModel`] combining a replay cache with an optional transport.
pub struct CachedClient {
    mode: LlmMode,
    cache: ReplayCache,
    transport: Option<Box<dyn Transport>>,
    permits: Permits,
}

impl CachedClient {
    pub fn new(mode: LlmMode, cache: ReplayCache, transport: Option<Box<dyn Transport>>) -> Self {
        Self {
            mode,
            cache,
            transport,
            permits: Permits::new(4),
        }
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.permits = Permits::new(n);
        self
    }

    pub fn mode(&self) -> LlmMode {
        self.mode
    }

    fn call(&self, request: &ChatRequest) -> Result<ChatExchange, LlmError> {
        let transport = self.transport.as_ref().ok_or(LlmError::NotConfigured)?;
        let started = Instant::now();
        let reply = self.permits.run(|| transport.send(request))?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let usage = reply
            .usage
            .unwrap_or_else(|| Usage::estimate(request, &reply.text));
        Ok(ChatExchange {
            request: request.clone(),
            response_text: reply.text,
            usage,
            latency_ms,
        })
    }
}

impl ChatModel for CachedClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatExchange, LlmError> {
        let key = request.cache_key();
        match self.mode {
            LlmMode::Live => self.call(request),
            LlmMode::Replay => self
                .cache
                .get(&key)?
                .ok_or(LlmError::PlannerUnavailable { key: key.0 }),
            LlmMode::Record => {
                if let Some(hit) = self.cache.get(&key)? {
                    return Ok(hit);
                }
                let exchange = match self.call(request) {
                    Ok(x) => x,
                    Err(LlmError::NotConfigured) => {
                        return Err(LlmError::PlannerUnavailable { key: key.0 })
                    }
                    Err(e) => return Err(e),
                };
                self.cache.put(&exchange)?;
                Ok(exchange)
            }
        }
    }
}

/// Client settings, normally read from `WRAC_LLM_*` environment variables.
#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    pub mode: LlmMode,
    pub model: String,
    pub cache_dir: PathBuf,
}

impl LlmConfig {
    pub fn from_env() -> Result<Self, String> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        Ok(Self {
            endpoint: var(ENV_ENDPOINT),
            api_key: var(ENV_API_KEY),
            mode: var(ENV_MODE).map_or(Ok(LlmMode::Replay), |m| m.parse())?,
            model: var(ENV_MODEL).unwrap_or_else(|| DEFAULT_MODEL.to_string()),
            cache_dir: var(ENV_CACHE_DIR).map_or_else(|| PathBuf::from("llm-cache"), PathBuf::from),
        })
    }

    pub fn build(&self) -> Result<CachedClient, LlmError> {
        let transport: Option<Box<dyn Transport>> = match &self.endpoint {
            Some(url) if self.mode != LlmMode::Replay => {
                Some(Box::new(HttpTransport::new(url.clone(), self.api_key.clone())?))
            }
            _ => None,
        };
        Ok(CachedClient::new(
            self.mode,
            ReplayCache::new(&self.cache_dir),
            transport,
        ))
    }
}
