//! Stage prompt templates and slot rendering.
//!
//! Templates use `{slot_name}` placeholders. Rendering replaces each
//! placeholder with the bound text verbatim, in one pass: slot content is never
//! rescanned, so braces inside slot text survive untouched.

mod templates;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::types::{Family, Task, TestCase, TestMode};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("missing slot `{0}`")]
    MissingSlot(String),
    #[error("template {file} references unknown slot `{slot}`")]
    UnknownSlot { file: String, slot: String },
    #[error("cannot read template {file}: {message}")]
    Io { file: String, message: String },
}

/// Every slot name a template may reference.
pub const SLOT_NAMES: [&str; 10] = [
    "question",
    "design_solution",
    "implementation_solution",
    "result_traceback",
    "test_case",
    "first_solution",
    "result",
    "examples",
    "prompt_name",
    "experience_digest",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PromptStage {
    Plan,
    Code,
    Debug,
    Expert,
    Refine,
}

impl PromptStage {
    pub const ALL: [PromptStage; 5] =
        [PromptStage::Plan, PromptStage::Code, PromptStage::Debug, PromptStage::Expert, PromptStage::Refine];

    pub fn as_str(&self) -> &'static str {
        match self {
            PromptStage::Plan => "plan",
            PromptStage::Code => "code",
            PromptStage::Debug => "debug",
            PromptStage::Expert => "expert",
            PromptStage::Refine => "refine",
        }
    }
}

impl fmt::Display for PromptStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateId {
    pub stage: PromptStage,
    pub family: Family,
}

impl TemplateId {
    /// File name used for on-disk overrides, e.g. `code.apps.txt`.
    pub fn file_name(&self) -> String {
        format!("{}.{}.txt", self.stage, self.family)
    }
}

/// Total over the stage × family grid.
pub fn select(stage: PromptStage, family: Family) -> TemplateId {
    TemplateId { stage, family }
}

fn builtin(id: TemplateId) -> &'static str {
    use templates::*;
    match (id.stage, id.family) {
        (PromptStage::Plan, _) => PLAN,
        (PromptStage::Code, Family::Basic) => CODE_BASIC,
        (PromptStage::Code, Family::Apps) => CODE_APPS,
        (PromptStage::Code, Family::Contest) => CODE_CONTEST,
        (PromptStage::Debug, Family::Basic) => DEBUG_BASIC,
        (PromptStage::Debug, Family::Apps) => DEBUG_APPS,
        (PromptStage::Debug, Family::Contest) => DEBUG_CONTEST,
        (PromptStage::Expert, Family::Basic) => EXPERT_BASIC,
        (PromptStage::Expert, Family::Apps) => EXPERT_APPS,
        (PromptStage::Expert, Family::Contest) => EXPERT_CONTEST,
        (PromptStage::Refine, Family::Basic) => REFINE_BASIC,
        (PromptStage::Refine, Family::Apps) => REFINE_APPS,
        (PromptStage::Refine, Family::Contest) => REFINE_CONTEST,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlotMap(BTreeMap<String, String>);

impl SlotMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<String>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<String>) {
        self.0.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

/// Splits a template into literal text and `{slot}` placeholders.
fn pieces(template: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let name_len = after
            .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
            .unwrap_or(after.len());
        if name_len > 0 && after[name_len..].starts_with('}') {
            if open > 0 {
                out.push(Piece::Text(&rest[..open]));
            }
            out.push(Piece::Slot(&after[..name_len]));
            rest = &after[name_len + 1..];
        } else {
            out.push(Piece::Text(&rest[..=open]));
            rest = after;
        }
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    out
}

/// Placeholder names referenced by a template, in order of appearance.
pub fn placeholders(template: &str) -> Vec<&str> {
    pieces(template)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Slot(s) => Some(s),
            Piece::Text(_) => None,
        })
        .collect()
}

/// Substitutes `slots` into `template`.
pub fn render_str(template: &str, slots: &SlotMap) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() + 256);
    for piece in pieces(template) {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(name) => {
                let value = slots.get(name).ok_or_else(|| PromptError::MissingSlot(name.to_string()))?;
                out.push_str(value);
            }
        }
    }
    Ok(out)
}

/// The fifteen stage templates, built in unless overridden from disk.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    overrides: HashMap<TemplateId, String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        TemplateSet { overrides: HashMap::new() }
    }

    /// Loads `<stage>.<family>.txt` files from `dir`; missing files keep the built-in text.
    pub fn with_overrides(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let mut overrides = HashMap::new();
        for stage in PromptStage::ALL {
            for family in Family::ALL {
                let id = select(stage, family);
                let path = dir.join(id.file_name());
                if !path.exists() {
                    continue;
                }
                let text = fs::read_to_string(&path).map_err(|e| PromptError::Io {
                    file: path.display().to_string(),
                    message: e.to_string(),
                })?;
                if let Some(bad) = placeholders(&text).into_iter().find(|s| !SLOT_NAMES.contains(s)) {
                    return Err(PromptError::UnknownSlot { file: id.file_name(), slot: bad.to_string() });
                }
                overrides.insert(id, text);
            }
        }
        Ok(TemplateSet { overrides })
    }

    pub fn template(&self, id: TemplateId) -> &str {
        self.overrides.get(&id).map(String::as_str).unwrap_or_else(|| builtin(id))
    }

    pub fn render(&self, id: TemplateId, slots: &SlotMap) -> Result<String, PromptError> {
        render_str(self.template(id), slots)
    }
}

/// Renders with the built-in templates.
pub fn render(id: TemplateId, slots: &SlotMap) -> Result<String, PromptError> {
    render_str(builtin(id), slots)
}

/// Formats sample I/O the way prompts present it to the model.
pub fn format_test_cases(task: &Task) -> String {
    task.sample_io.iter().map(|c| format_case(c, task.entry_point.as_deref())).collect::<Vec<_>>().join("\n")
}

fn format_case(case: &TestCase, entry_point: Option<&str>) -> String {
    match case.mode {
        TestMode::AssertExpr => case.input.clone(),
        TestMode::CallCompare => {
            let input = case.input.trim();
            let call = match entry_point {
                Some(ep) if !input.starts_with(&format!("{ep}(")) => format!("{ep}({input})"),
                _ => input.to_string(),
            };
            format!("assert {call} == {}", case.expected.trim())
        }
        TestMode::StringFn => format!("Input:\n{}\nOutput:\n{}", case.input, case.expected),
    }
}
