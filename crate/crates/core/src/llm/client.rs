use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ChatMessage;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";
pub const ENDPOINT_OVERRIDE_ENV: &str = "JSONORACLE_ENDPOINT";

/// One chat-completion request, as sent on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub top_p: f64,
}

impl ChatRequest {
    /// Hex SHA-256 of the canonical JSON body.
    pub fn hash(&self) -> String {
        crate::sha256_hex(serde_json::to_vec(self).expect("request serializes"))
    }

    pub fn context_chars(&self) -> usize {
        self.messages
            .iter()
            .map(|m| m.content.chars().count())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("context window exceeded: {0}")]
    ContextOverflow(String),
    #[error("empty response")]
    EmptyResponse,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("mock: {0}")]
    Mock(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Transport(_) => true,
            LlmError::Http { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

pub trait LlmClient: Send + Sync {
    /// Returns the assistant content of the first choice.
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError>;

    /// Upper bound on concurrent calls this client tolerates, if any.
    fn max_concurrency(&self) -> Option<usize> {
        None
    }
}

impl<T: LlmClient + ?Sized> LlmClient for Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }

    fn max_concurrency(&self) -> Option<usize> {
        (**self).max_concurrency()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpClientConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub verbose: bool,
}

impl HttpClientConfig {
    /// Endpoint from `JSONORACLE_ENDPOINT` when set, else `endpoint`; token
    /// from the variable named `api_key_env`.
    pub fn from_env(endpoint: Option<&str>, api_key_env: &str) -> Self {
        let endpoint = std::env::var(ENDPOINT_OVERRIDE_ENV)
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| endpoint.map(str::to_string))
            .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
        HttpClientConfig {
            endpoint,
            api_key: std::env::var(api_key_env).ok().filter(|s| !s.is_empty()),
            timeout: Duration::from_secs(120),
            verbose: false,
        }
    }
}

/// Chat-completions over HTTP(S) with JSON bodies.
pub struct HttpClient {
    config: HttpClientConfig,
    http: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

impl HttpClient {
    pub fn new(config: HttpClientConfig) -> Result<Self, LlmError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(HttpClient { config, http })
    }

    fn redact(&self, s: &str) -> String {
        match &self.config.api_key {
            Some(k) if !k.is_empty() => s.replace(k.as_str(), "<redacted>"),
            _ => s.to_string(),
        }
    }
}

impl LlmClient for HttpClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let body = serde_json::to_string(request).expect("request serializes");
        if self.config.verbose {
            tracing::info!(endpoint = %self.config.endpoint, body = %self.redact(&body), "llm request");
        }
        let mut rb = self
            .http
            .post(&self.config.endpoint)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body);
        if let Some(key) = &self.config.api_key {
            rb = rb.bearer_auth(key);
        }
        let resp = rb
            .send()
            .map_err(|e| LlmError::Transport(self.redact(&e.to_string())))?;
        let status = resp.status().as_u16();
        let text = resp
            .text()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        if self.config.verbose {
            tracing::info!(status, body = %self.redact(&text), "llm response");
        }
        if !(200..300).contains(&status) {
            if status == 400 && text.contains("context_length_exceeded") {
                return Err(LlmError::ContextOverflow(text));
            }
            return Err(LlmError::Http { status, body: text });
        }
        let parsed: WireResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::Malformed(e.to_string()))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.trim().is_empty() {
            return Err(LlmError::EmptyResponse);
        }
        Ok(content)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Retries transport errors and 5xx responses with doubling backoff.
pub struct RetryingClient<C> {
    inner: C,
    policy: RetryPolicy,
    sleep: Sleeper,
    retries: AtomicU64,
}

impl<C: LlmClient> RetryingClient<C> {
    pub fn new(inner: C, policy: RetryPolicy) -> Self {
        RetryingClient {
            inner,
            policy,
            sleep: Arc::new(std::thread::sleep),
            retries: AtomicU64::new(0),
        }
    }

    /// Replaces the sleep function, e.g. to record backoffs in tests.
    pub fn with_sleeper(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Arc::new(sleep);
        self
    }

    /// Total retries performed so far.
    pub fn retries(&self) -> u64 {
        self.retries.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }
}

impl<C: LlmClient> LlmClient for RetryingClient<C> {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let mut backoff = self.policy.initial_backoff;
        let mut attempt = 1;
        loop {
            match self.inner.complete(request) {
                Err(e) if e.is_retryable() && attempt < self.policy.attempts => {
                    tracing::warn!(attempt, error = %e, backoff_ms = backoff.as_millis() as u64, "retrying llm call");
                    self.retries.fetch_add(1, Ordering::Relaxed);
                    (self.sleep)(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn max_concurrency(&self) -> Option<usize> {
        self.inner.max_concurrency()
    }
}
