use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::types::{validate_dataset, validate_task, Family, Task, TestCase, TestMode};

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub task_id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_point: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub tests: Vec<DatasetTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetTest {
    pub input: String,
    #[serde(default)]
    pub expected: String,
    /// Defaults to the family's usual protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<TestMode>,
}

impl DatasetRecord {
    pub fn into_task(self, family: Family) -> Task {
        let family = self.family.unwrap_or(family);
        Task {
            id: self.task_id,
            description: self.description,
            sample_io: self
                .tests
                .into_iter()
                .map(|t| TestCase { input: t.input, expected: t.expected, mode: t.mode.unwrap_or(family.default_mode()) })
                .collect(),
            entry_point: self.entry_point,
            family,
            difficulty: self.difficulty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub tasks: Vec<Task>,
    /// Lines dropped in lenient mode.
    pub skipped: Vec<SkippedLine>,
}

fn parse_line(line: &str, number: usize, family: Family) -> Result<Task, BenchError> {
    let record: DatasetRecord = serde_json::from_str(line)
        .map_err(|e| BenchError::MalformedDataset { line: number, message: e.to_string() })?;
    if let Some(f) = record.family {
        if f != family {
            return Err(BenchError::MalformedDataset {
                line: number,
                message: format!("task `{}` is {f}, dataset loaded as {family}", record.task_id),
            });
        }
    }
    let task = record.into_task(family);
    let problems = validate_task(&task);
    if !problems.is_empty() {
        return Err(BenchError::InvalidTask { line: number, task_id: task.id, problems });
    }
    Ok(task)
}

/// Parses JSON Lines dataset text. Blank lines are ignored. Without
/// `lenient`, the first bad line fails the load; with it, bad lines are
/// skipped and listed.
pub fn parse_dataset(text: &str, family: Family, lenient: bool) -> Result<Dataset, BenchError> {
    let mut out = Dataset::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line, i + 1, family) {
            Ok(task) => {
                if out.tasks.iter().any(|t| t.id == task.id) {
                    let err = BenchError::InvalidTask {
                        line: i + 1,
                        task_id: task.id.clone(),
                        problems: vec!["duplicate task id".into()],
                    };
                    if !lenient {
                        return Err(err);
                    }
                    out.skipped.push(SkippedLine { line: i + 1, message: err.to_string() });
                    continue;
                }
                out.tasks.push(task);
            }
            Err(e) if lenient => out.skipped.push(SkippedLine { line: i + 1, message: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    debug_assert!(validate_dataset(&out.tasks).is_empty());
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>, family: Family, lenient: bool) -> Result<Dataset, BenchError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| BenchError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_dataset(&text, family, lenient)
}
