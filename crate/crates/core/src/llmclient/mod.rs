//! Chat-completion client: bounded concurrency, retries with exponential
//! backoff, and cassette record/replay for fully offline runs.

mod cassette;

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::json;

pub use cassette::{prompt_hash, Cassette, CassetteEntry};

use crate::detectors::SmellKind;

pub const ENV_API_BASE: &str = "SMELLCC_API_BASE";
pub const ENV_API_KEY: &str = "SMELLCC_API_KEY";
pub const ENV_MODEL: &str = "SMELLCC_MODEL";

const TOKENS_DEFAULT: u32 = 2048;
const TOKENS_LONG_PARAMETER_LIST: u32 = 8192;

#[derive(Debug, Clone)]
pub struct CompletionRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout: Duration,
}

impl CompletionRequest {
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> CompletionRequest {
        CompletionRequest {
            model: model.into(),
            prompt: prompt.into(),
            temperature: 0.0,
            max_tokens: TOKENS_DEFAULT,
            timeout: Duration::from_secs(120),
        }
    }

    /// Token budget per kind: the long-parameter-list rewrite needs room for
    /// the dataclass plus the adapter, everything else stays small.
    pub fn for_kind(kind: SmellKind, model: impl Into<String>, prompt: impl Into<String>) -> Self {
        let mut req = CompletionRequest::new(model, prompt);
        if kind == SmellKind::LongParameterList {
            req.max_tokens = TOKENS_LONG_PARAMETER_LIST;
        }
        req
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CassetteMode {
    Record,
    Replay,
    Passthrough,
}

impl std::str::FromStr for CassetteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "record" => Ok(CassetteMode::Record),
            "replay" => Ok(CassetteMode::Replay),
            "passthrough" => Ok(CassetteMode::Passthrough),
            other => Err(format!("unknown cassette mode: {other}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub base_url: String,
    pub api_key: String,
    pub model: String,
    pub max_concurrency: usize,
    pub max_retries: u32,
    pub backoff_initial: Duration,
    pub backoff_multiplier: f64,
    /// Send the role text as a separate system message instead of embedding
    /// it in the user turn.
    pub system_role_split: bool,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: String::new(),
            api_key: String::new(),
            model: "deepseek-coder".to_string(),
            max_concurrency: 4,
            max_retries: 3,
            backoff_initial: Duration::from_millis(250),
            backoff_multiplier: 2.0,
            system_role_split: false,
        }
    }
}

impl ClientConfig {
    /// Environment overrides: SMELLCC_API_BASE, SMELLCC_API_KEY, SMELLCC_MODEL.
    pub fn from_env(mut self) -> Self {
        if let Ok(base) = std::env::var(ENV_API_BASE) {
            self.base_url = base;
        }
        if let Ok(key) = std::env::var(ENV_API_KEY) {
            self.api_key = key;
        }
        if let Ok(model) = std::env::var(ENV_MODEL) {
            self.model = model;
        }
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_concurrency < 1 {
            return Err("max_concurrency must be >= 1".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("rate limited after {0} retries")]
    RateLimited(u32),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("server error HTTP {status} after {retries} retries")]
    Server { status: u16, retries: u32 },
    #[error("completion was empty")]
    EmptyCompletion,
    #[error("cassette miss for prompt hash {0}")]
    CassetteMiss(String),
    #[error("cassette io: {0}")]
    CassetteIo(String),
    #[error("client not configured: {0}")]
    NotConfigured(String),
}

/// Minimal counting semaphore; `ureq` is blocking so threads just park.
struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(count: usize) -> Semaphore {
        Semaphore {
            permits: Mutex::new(count),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.cv.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { sem: self }
    }
}

struct SemaphoreGuard<'a> {
    sem: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        let mut permits = self.sem.permits.lock().unwrap();
        *permits += 1;
        self.sem.cv.notify_one();
    }
}

/// Thread-safe completion client. Clones share nothing; share one instance
/// behind an `Arc` to enforce the concurrency cap across workers.
pub struct LlmClient {
    config: ClientConfig,
    agent: ureq::Agent,
    semaphore: Semaphore,
    mode: CassetteMode,
    cassette: Option<Mutex<Cassette>>,
    requests_sent: Mutex<u64>,
}

impl LlmClient {
    pub fn new(config: ClientConfig) -> Result<LlmClient, LlmError> {
        config.validate().map_err(LlmError::NotConfigured)?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Ok(LlmClient {
            semaphore: Semaphore::new(config.max_concurrency),
            agent,
            config,
            mode: CassetteMode::Passthrough,
            cassette: None,
            requests_sent: Mutex::new(0),
        })
    }

    /// Attaches a cassette. `Record` appends live responses; `Replay` serves
    /// from the cassette and never touches the network.
    pub fn with_cassette(
        mut self,
        mode: CassetteMode,
        path: &std::path::Path,
    ) -> Result<LlmClient, LlmError> {
        let cassette = Cassette::open(path).map_err(|e| LlmError::CassetteIo(e.to_string()))?;
        self.mode = mode;
        self.cassette = Some(Mutex::new(cassette));
        Ok(self)
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// Number of HTTP requests actually sent (excludes cassette hits).
    pub fn requests_sent(&self) -> u64 {
        *self.requests_sent.lock().unwrap()
    }

    /// Returns the first choice's text. Retries transient failures (HTTP 429
    /// and 5xx, transport errors) with exponential backoff; 401/403 never
    /// retry.
    pub fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        if self.mode == CassetteMode::Replay {
            let hash = prompt_hash(&req.prompt);
            let cassette = self
                .cassette
                .as_ref()
                .ok_or_else(|| LlmError::NotConfigured("replay mode without cassette".into()))?;
            let guard = cassette.lock().unwrap();
            return match guard.lookup(&hash) {
                Some(response) => Ok(response.to_string()),
                None => Err(LlmError::CassetteMiss(hash)),
            };
        }

        if self.config.base_url.is_empty() {
            return Err(LlmError::NotConfigured(format!(
                "no endpoint configured (set {ENV_API_BASE} or use cassette replay)"
            )));
        }

        let _permit = self.semaphore.acquire();
        let response = self.send_with_retries(req)?;

        if self.mode == CassetteMode::Record {
            if let Some(cassette) = &self.cassette {
                cassette
                    .lock()
                    .unwrap()
                    .record(&req.prompt, &response, &req.model)
                    .map_err(|e| LlmError::CassetteIo(e.to_string()))?;
            }
        }
        Ok(response)
    }

    fn send_with_retries(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let mut delay = self.config.backoff_initial;
        let mut attempt = 0u32;
        loop {
            match self.send_once(req) {
                Ok(text) => return Ok(text),
                Err(SendError::Fatal(e)) => return Err(e),
                Err(SendError::Transient(kind)) => {
                    if attempt >= self.config.max_retries {
                        return Err(match kind {
                            TransientKind::RateLimited => {
                                LlmError::RateLimited(self.config.max_retries)
                            }
                            TransientKind::Server(status) => LlmError::Server {
                                status,
                                retries: self.config.max_retries,
                            },
                            TransientKind::Transport(msg) => LlmError::Transport(msg),
                        });
                    }
                    std::thread::sleep(delay);
                    delay = delay.mul_f64(self.config.backoff_multiplier);
                    attempt += 1;
                }
            }
        }
    }

    fn send_once(&self, req: &CompletionRequest) -> Result<String, SendError> {
        let messages = if self.config.system_role_split {
            // Split the first line (the role designation) into a system turn.
            let (role, rest) = req.prompt.split_once('\n').unwrap_or((req.prompt.as_str(), ""));
            json!([
                {"role": "system", "content": role},
                {"role": "user", "content": rest},
            ])
        } else {
            json!([{"role": "user", "content": req.prompt}])
        };
        let body = json!({
            "model": req.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let url = endpoint_url(&self.config.base_url);

        *self.requests_sent.lock().unwrap() += 1;
        let result = self
            .agent
            .post(&url)
            .header("authorization", &format!("Bearer {}", self.config.api_key))
            .header("content-type", "application/json")
            .config()
            .timeout_global(Some(req.timeout))
            .build()
            .send_json(&body);

        let mut response = match result {
            Ok(r) => r,
            Err(e) => return Err(SendError::Transient(TransientKind::Transport(e.to_string()))),
        };
        let status = response.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(SendError::Fatal(LlmError::Auth(status))),
            429 => return Err(SendError::Transient(TransientKind::RateLimited)),
            500..=599 => return Err(SendError::Transient(TransientKind::Server(status))),
            other => {
                return Err(SendError::Fatal(LlmError::Transport(format!(
                    "unexpected HTTP status {other}"
                ))))
            }
        }
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| SendError::Transient(TransientKind::Transport(e.to_string())))?;
        let text = value["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string();
        if text.is_empty() {
            return Err(SendError::Fatal(LlmError::EmptyCompletion));
        }
        Ok(text)
    }
}

enum TransientKind {
    RateLimited,
    Server(u16),
    Transport(String),
}

enum SendError {
    Fatal(LlmError),
    Transient(TransientKind),
}

fn endpoint_url(base: &str) -> String {
    let trimmed = base.trim_end_matches('/');
    if trimmed.ends_with("/chat/completions") {
        trimmed.to_string()
    } else {
        format!("{trimmed}/chat/completions")
    }
}
