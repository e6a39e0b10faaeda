//! Deterministic replay backend driven by a JSON Lines script.
//!
//! Each line is one [`ScriptEntry`]. A call made at stage label `group1.plan`
//! for the first time within a task looks up `group1.plan#1`; a key may also be
//! scoped to one task as `<task_id>/group1.plan#1`, which wins over the
//! unscoped form.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BackendError, CallSite, ChatBackend, Completion};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub match_key: String,
    pub response_text: String,
    #[serde(rename = "prompt_tokens")]
    pub declared_prompt_tokens: u64,
    #[serde(rename = "completion_tokens")]
    pub declared_completion_tokens: u64,
}

impl ScriptEntry {
    pub fn new(key: impl Into<String>, text: impl Into<String>, prompt: u64, completion: u64) -> Self {
        ScriptEntry {
            match_key: key.into(),
            response_text: text.into(),
            declared_prompt_tokens: prompt,
            declared_completion_tokens: completion,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    entries: HashMap<String, ScriptEntry>,
}

impl ScriptedBackend {
    pub fn from_entries(entries: Vec<ScriptEntry>) -> Result<Self, BackendError> {
        let mut map = HashMap::with_capacity(entries.len());
        for entry in entries {
            if map.contains_key(&entry.match_key) {
                return Err(BackendError::DuplicateKey(entry.match_key));
            }
            map.insert(entry.match_key.clone(), entry);
        }
        Ok(ScriptedBackend { entries: map })
    }

    pub fn parse(text: &str) -> Result<Self, BackendError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line).map_err(|e| {
                BackendError::MalformedScript { line: i + 1, message: e.to_string() }
            })?;
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BackendError::MalformedScript {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, site: &CallSite<'_>) -> Option<&ScriptEntry> {
        let key = site.key();
        self.entries
            .get(&format!("{}/{key}", site.task_id))
            .or_else(|| self.entries.get(&key))
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _prompt: &str, site: &CallSite<'_>) -> Result<Completion, BackendError> {
        let entry = self
            .lookup(site)
            .ok_or_else(|| BackendError::ScriptExhausted { key: site.key(), task_id: site.task_id.to_string() })?;
        Ok(Completion {
            text: entry.response_text.clone(),
            prompt_tokens: entry.declared_prompt_tokens,
            completion_tokens: entry.declared_completion_tokens,
        })
    }

    fn name(&self) -> &'static str {
        "scripted"
    }
}
