//! Chat-completion backends and usage accounting.
//!
//! Two implementations sit behind [`ChatBackend`]: [`LiveBackend`] speaks the
//! common chat-completions wire protocol over HTTP, [`ScriptedBackend`]
//! replays canned responses keyed by stage label and attempt. Pipelines talk to
//! either through a per-task [`Session`], which numbers attempts, keeps the
//! task's [`UsageLedger`] and records every rendered prompt.

mod ledger;
mod live;
mod scripted;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ledger::{Usage, UsageLedger};
pub use live::LiveBackend;
pub use scripted::{ScriptEntry, ScriptedBackend};

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("backend returned an empty completion")]
    EmptyCompletion,
    #[error("script exhausted: no entry for match_key `{key}` (task `{task_id}`)")]
    ScriptExhausted { key: String, task_id: String },
    #[error("malformed script at line {line}: {message}")]
    MalformedScript { line: usize, message: String },
    #[error("duplicate match_key `{0}` in script")]
    DuplicateKey(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

impl BackendError {
    pub fn is_script_exhausted(&self) -> bool {
        matches!(self, BackendError::ScriptExhausted { .. })
    }

    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            BackendError::Unavailable { .. } => "backend_unavailable",
            BackendError::EmptyCompletion => "empty_completion",
            BackendError::ScriptExhausted { .. } => "script_exhausted",
            BackendError::MalformedScript { .. } => "malformed_script",
            BackendError::DuplicateKey(_) => "duplicate_key",
            BackendError::Config(_) => "backend_config",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub api_key_env_var: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub script_path: Option<String>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Scripted,
            endpoint_url: None,
            model_name: None,
            api_key_env_var: None,
            temperature: 1.0,
            max_retries: 3,
            script_path: None,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            v.push(format!("temperature must be >= 0, got {}", self.temperature));
        }
        match self.kind {
            BackendKind::Live => {
                for (name, field) in [
                    ("endpoint_url", &self.endpoint_url),
                    ("model_name", &self.model_name),
                    ("api_key_env_var", &self.api_key_env_var),
                ] {
                    if field.as_deref().is_none_or(str::is_empty) {
                        v.push(format!("live backend requires {name}"));
                    }
                }
            }
            BackendKind::Scripted => {
                if self.script_path.as_deref().is_none_or(str::is_empty) {
                    v.push("scripted backend requires script_path".into());
                }
            }
        }
        v
    }

    /// Instantiates the configured backend.
    pub fn build(&self) -> Result<Arc<dyn ChatBackend>, BackendError> {
        let problems = self.validate();
        if !problems.is_empty() {
            return Err(BackendError::Config(problems.join("; ")));
        }
        match self.kind {
            BackendKind::Scripted => {
                let path = self.script_path.as_deref().unwrap_or_default();
                Ok(Arc::new(ScriptedBackend::load(path)?))
            }
            BackendKind::Live => Ok(Arc::new(LiveBackend::from_config(self)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Identifies one logical call: which task, which stage label, which attempt.
#[derive(Debug, Clone, Copy)]
pub struct CallSite<'a> {
    pub task_id: &'a str,
    pub label: &'a str,
    /// 1-based count of calls made with this label within the task.
    pub attempt: u32,
    /// Sampling seed of the seat issuing the call; peers get fresh seeds.
    pub seed: Option<u64>,
}

impl CallSite<'_> {
    /// Script match key, e.g. `group2.code#1`.
    pub fn key(&self) -> String {
        format!("{}#{}", self.label, self.attempt)
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &str, site: &CallSite<'_>) -> Result<Completion, BackendError>;

    fn name(&self) -> &'static str;
}

/// A prompt as sent, kept for auditing and replay inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentPrompt {
    pub key: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptHash {
    pub key: String,
    pub sha256: String,
}

/// Per-task view of a backend.
pub struct Session<'a> {
    backend: &'a dyn ChatBackend,
    task_id: String,
    attempts: BTreeMap<String, u32>,
    ledger: UsageLedger,
    sent: Vec<SentPrompt>,
}

impl<'a> Session<'a> {
    pub fn new(backend: &'a dyn ChatBackend, task_id: impl Into<String>) -> Self {
        Session {
            backend,
            task_id: task_id.into(),
            attempts: BTreeMap::new(),
            ledger: UsageLedger::new(),
            sent: Vec::new(),
        }
    }

    /// Sends `prompt` under `stage_label`. The ledger changes only on success.
    pub fn complete(&mut self, prompt: &str, stage_label: &str) -> Result<Completion, BackendError> {
        self.complete_seeded(prompt, stage_label, None)
    }

    pub fn complete_seeded(
        &mut self,
        prompt: &str,
        stage_label: &str,
        seed: Option<u64>,
    ) -> Result<Completion, BackendError> {
        let attempt = self.attempts.get(stage_label).copied().unwrap_or(0) + 1;
        let site = CallSite { task_id: &self.task_id, label: stage_label, attempt, seed };
        let completion = self.backend.complete(prompt, &site)?;
        if completion.text.trim().is_empty() {
            return Err(BackendError::EmptyCompletion);
        }
        self.attempts.insert(stage_label.to_string(), attempt);
        self.ledger.record(stage_label, &completion);
        self.sent.push(SentPrompt { key: site.key(), text: prompt.to_string() });
        Ok(completion)
    }

    pub fn ledger(&self) -> &UsageLedger {
        &self.ledger
    }

    pub fn sent(&self) -> &[SentPrompt] {
        &self.sent
    }

    pub fn prompt_hashes(&self) -> Vec<PromptHash> {
        self.sent
            .iter()
            .map(|p| PromptHash { key: p.key.clone(), sha256: hex::encode(Sha256::digest(p.text.as_bytes())) })
            .collect()
    }

    pub fn into_parts(self) -> (UsageLedger, Vec<SentPrompt>) {
        (self.ledger, self.sent)
    }
}
