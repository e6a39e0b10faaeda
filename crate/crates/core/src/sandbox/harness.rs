use serde::Serialize;

use super::SandboxError;
use crate::types::{Family, TestCase, TestMode};

const DRIVER: &str = include_str!("driver.py");

/// A runnable Python file: the candidate embedded as data plus a test driver
/// that prints one `CASE <i> PASS|FAIL` line per case to stdout and the first
/// failure's traceback to stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessSource {
    pub source: String,
    pub protocol: TestMode,
    pub case_count: usize,
}

#[derive(Serialize)]
struct DriverCase<'a> {
    input: &'a str,
    expected: &'a str,
    mode: TestMode,
}

/// Pulls the first fenced code block out of a completion, or returns the text as-is.
pub fn extract_code(completion: &str) -> String {
    if let Some(open) = completion.find("```") {
        let after_fence = &completion[open + 3..];
        let body_start = after_fence.find('\n').map(|i| i + 1).unwrap_or(after_fence.len());
        let body = &after_fence[body_start..];
        let body = match body.find("```") {
            Some(close) => &body[..close],
            None => body,
        };
        return body.trim_end().to_string();
    }
    completion.trim_matches(|c| c == '\n' || c == '\r').trim_end().to_string()
}

/// Names of functions defined at column zero (`def f(` or `async def f(`).
pub fn top_level_functions(source: &str) -> Vec<String> {
    source
        .lines()
        .filter_map(|line| {
            let rest = line.strip_prefix("async def ").or_else(|| line.strip_prefix("def "))?;
            let name: String = rest.trim_start().chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
            (!name.is_empty()).then_some(name)
        })
        .collect()
}

fn python_literal(json_text: &str) -> String {
    serde_json::to_string(json_text).expect("string serialization cannot fail")
}

/// Wraps `source` in a driver that checks it against `cases`.
pub fn build_harness(
    source: &str,
    cases: &[TestCase],
    family: Family,
    entry_point: Option<&str>,
) -> Result<HarnessSource, SandboxError> {
    if cases.is_empty() {
        return Err(SandboxError::NoCases);
    }
    if source.trim().is_empty() {
        return Err(SandboxError::EmptySource);
    }
    if let Some(bad) = cases.iter().find(|c| !family.allows(c.mode)) {
        return Err(SandboxError::ModeMismatch { family, mode: bad.mode });
    }
    let functions = top_level_functions(source);
    let entry: Option<String> = if cases.iter().any(|c| c.mode == TestMode::StringFn) {
        match functions.as_slice() {
            [only] => Some(only.clone()),
            _ => return Err(SandboxError::AmbiguousEntry { found: functions }),
        }
    } else {
        let entry = entry_point.map(str::trim).filter(|e| !e.is_empty()).map(str::to_string);
        if family == Family::Apps {
            match &entry {
                Some(e) if functions.iter().any(|f| f == e) => {}
                Some(e) => return Err(SandboxError::MissingEntry(e.clone())),
                None => return Err(SandboxError::MissingEntry(String::new())),
            }
        }
        entry
    };

    let driver_cases: Vec<DriverCase<'_>> = cases
        .iter()
        .map(|c| DriverCase { input: &c.input, expected: &c.expected, mode: c.mode })
        .collect();
    let cases_json = serde_json::to_string(&driver_cases).expect("cases serialize");
    let candidate_json = serde_json::to_string(source).expect("source serializes");
    let entry_json = serde_json::to_string(&entry).expect("entry serializes");

    let text = DRIVER
        .replace("__CANDIDATE_JSON__", &python_literal(&candidate_json))
        .replace("__CASES_JSON__", &python_literal(&cases_json))
        .replace("__ENTRY_JSON__", &python_literal(&entry_json));

    Ok(HarnessSource { source: text, protocol: cases[0].mode, case_count: cases.len() })
}
