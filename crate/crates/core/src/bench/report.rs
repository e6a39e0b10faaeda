use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{BenchError, RunMetrics};
use crate::pipeline::TaskResult;

fn report_err(path: &Path, e: impl std::fmt::Display) -> BenchError {
    BenchError::ReportFailed { path: path.display().to_string(), message: e.to_string() }
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| report_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| report_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| report_err(path, e))?;
    tmp.persist(path).map_err(|e| report_err(path, e.error))?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(metrics: &RunMetrics) -> String {
    let mut out = String::from("task_id,verdict,api_calls,prompt_tokens,completion_tokens,expert_attempts\n");
    for (id, t) in &metrics.per_task {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(id),
            t.final_verdict,
            t.api_calls,
            t.prompt_tokens,
            t.completion_tokens,
            t.expert_attempts
        ));
    }
    out
}

/// `pass@1=<x> api_calls=<y> tokens=<z>`, using the smallest k when 1 was not requested.
pub fn console_summary(metrics: &RunMetrics) -> String {
    let (k, v) = metrics
        .pass_at_k
        .get(&1)
        .map(|v| (1, *v))
        .or_else(|| metrics.pass_at_k.iter().next().map(|(k, v)| (*k, *v)))
        .unwrap_or((1, 0.0));
    format!("pass@{k}={v} api_calls={} tokens={}", metrics.totals.api_calls, metrics.totals.total_tokens())
}

/// Writes `metrics.json` and `summary.csv` into `out_dir`, replacing earlier
/// versions, and returns the console summary line.
pub fn report(metrics: &RunMetrics, out_dir: &Path) -> Result<String, BenchError> {
    let mut json = serde_json::to_vec_pretty(metrics).map_err(|e| report_err(out_dir, e))?;
    json.push(b'\n');
    write_atomic(&out_dir.join("metrics.json"), &json)?;
    write_atomic(&out_dir.join("summary.csv"), summary_csv(metrics).as_bytes())?;
    Ok(console_summary(metrics))
}

pub fn read_metrics(path: &Path) -> Result<RunMetrics, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| report_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| report_err(path, e))
}

/// File name for a task result: the id with unsafe characters replaced, plus
/// a short hash when replacement happened, plus the sample index when `n > 1`.
pub fn task_file_name(task_id: &str, sample_index: u32, samples: u32) -> String {
    let safe: String = task_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    let mut name = if safe == task_id && !safe.starts_with('.') {
        safe
    } else {
        let h = hex::encode(&Sha256::digest(task_id.as_bytes())[..4]);
        format!("{}-{h}", safe.trim_start_matches('.'))
    };
    if samples > 1 {
        name.push_str(&format!(".s{sample_index}"));
    }
    name.push_str(".json");
    name
}

/// Writes one JSON document per result under `<out_dir>/tasks/`, removing
/// result files of earlier runs first. Returns the written paths in order.
pub fn write_task_results(out_dir: &Path, results: &[TaskResult], samples: u32) -> Result<Vec<PathBuf>, BenchError> {
    let dir = out_dir.join("tasks");
    if dir.exists() {
        for entry in fs::read_dir(&dir).map_err(|e| report_err(&dir, e))? {
            let path = entry.map_err(|e| report_err(&dir, e))?.path();
            if path.extension().is_some_and(|x| x == "json") {
                fs::remove_file(&path).map_err(|e| report_err(&path, e))?;
            }
        }
    }
    results.iter().map(|r| write_task_result(out_dir, r, samples)).collect()
}

/// Writes one result to `<out_dir>/tasks/`, leaving other files alone.
pub fn write_task_result(out_dir: &Path, result: &TaskResult, samples: u32) -> Result<PathBuf, BenchError> {
    let path = out_dir.join("tasks").join(task_file_name(&result.task_id, result.sample_index, samples));
    let mut json = serde_json::to_vec_pretty(result).map_err(|e| report_err(&path, e))?;
    json.push(b'\n');
    write_atomic(&path, &json)?;
    Ok(path)
}
