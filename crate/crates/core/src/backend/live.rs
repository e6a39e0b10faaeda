use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{BackendConfig, BackendError, CallSite, ChatBackend, Completion};

const BACKOFF_BASE_MS: u64 = 500;
const BACKOFF_CAP_MS: u64 = 16_000;

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<ResponseUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct ResponseUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// HTTP chat-completions client. Token counts come from the provider's `usage` block.
pub struct LiveBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: String,
    temperature: f64,
    max_retries: u32,
    backoff_base: Duration,
}

enum Failure {
    Retryable(String),
    Fatal(BackendError),
}

impl LiveBackend {
    pub fn from_config(config: &BackendConfig) -> Result<Self, BackendError> {
        let var = config.api_key_env_var.as_deref().unwrap_or_default();
        let api_key = std::env::var(var)
            .map_err(|_| BackendError::Config(format!("environment variable `{var}` is not set")))?;
        Ok(Self::new(
            config.endpoint_url.clone().unwrap_or_default(),
            config.model_name.clone().unwrap_or_default(),
            api_key,
            config.temperature,
            config.max_retries,
        ))
    }

    pub fn new(endpoint: String, model: String, api_key: String, temperature: f64, max_retries: u32) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .into();
        LiveBackend {
            agent,
            endpoint,
            model,
            api_key,
            temperature,
            max_retries,
            backoff_base: Duration::from_millis(BACKOFF_BASE_MS),
        }
    }

    /// Shortens retry sleeps; used by tests against a local server.
    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    fn attempt(&self, prompt: &str, seed: Option<u64>) -> Result<Completion, Failure> {
        let body = ChatRequest {
            model: &self.model,
            messages: [Message { role: "user", content: prompt }],
            temperature: self.temperature,
            seed,
        };
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(Failure::Retryable(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            let text = response.body_mut().read_to_string().unwrap_or_default();
            return Err(Failure::Fatal(BackendError::Unavailable {
                attempts: 1,
                message: format!("HTTP {status}: {text}"),
            }));
        }
        let parsed: ChatResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Failure::Retryable(format!("unreadable response: {e}")))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if text.trim().is_empty() {
            return Err(Failure::Fatal(BackendError::EmptyCompletion));
        }
        let usage = parsed.usage.unwrap_or(ResponseUsage { prompt_tokens: 0, completion_tokens: 0 });
        Ok(Completion { text, prompt_tokens: usage.prompt_tokens, completion_tokens: usage.completion_tokens })
    }
}

impl ChatBackend for LiveBackend {
    fn complete(&self, prompt: &str, site: &CallSite<'_>) -> Result<Completion, BackendError> {
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                let factor = 1u64 << (attempt - 1).min(16);
                let ms = (self.backoff_base.as_millis() as u64).saturating_mul(factor).min(BACKOFF_CAP_MS);
                thread::sleep(Duration::from_millis(ms));
            }
            match self.attempt(prompt, site.seed) {
                Ok(c) => return Ok(c),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    warn!(key = %site.key(), attempt, "chat completion failed: {msg}");
                    last = msg;
                }
            }
        }
        Err(BackendError::Unavailable { attempts: self.max_retries + 1, message: last })
    }

    fn name(&self) -> &'static str {
        "live"
    }
}
