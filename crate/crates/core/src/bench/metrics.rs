use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pass_at_k, BenchError};
use crate::backend::UsageLedger;
use crate::pipeline::TaskResult;
use crate::types::Verdict;

/// Per-task tallies. Counters are summed over samples; `final_verdict` is
/// the verdict of the first sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub n: u32,
    pub c: u32,
    pub final_verdict: Verdict,
    pub api_calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub expert_attempts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyMetrics {
    pub tasks: u32,
    pub pass_at_k: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub per_task: BTreeMap<String, TaskMetrics>,
    pub pass_at_k: BTreeMap<u32, f64>,
    pub totals: UsageLedger,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_difficulty: Option<BTreeMap<String, DifficultyMetrics>>,
}

fn mean_pass_at_k<'a>(tasks: impl Iterator<Item = &'a TaskMetrics>, k: u32) -> Result<f64, BenchError> {
    let mut sum = 0.0;
    let mut count = 0u32;
    for t in tasks {
        sum += pass_at_k(t.n as u64, t.c as u64, k as u64)?;
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Folds task results into run metrics. Samples of one task share its id.
pub fn aggregate(results: &[TaskResult], k_values: &[u32]) -> Result<RunMetrics, BenchError> {
    if results.is_empty() {
        return Err(BenchError::InvalidArgs("no task results to aggregate".into()));
    }
    if k_values.is_empty() {
        return Err(BenchError::InvalidArgs("no k values requested".into()));
    }
    let mut per_task: BTreeMap<String, TaskMetrics> = BTreeMap::new();
    let mut totals = UsageLedger::new();
    let mut ordered: Vec<&TaskResult> = results.iter().collect();
    ordered.sort_by_key(|r| r.sample_index);
    for r in ordered {
        totals.merge(&r.ledger);
        let entry = per_task.entry(r.task_id.clone()).or_insert_with(|| TaskMetrics {
            n: 0,
            c: 0,
            final_verdict: r.final_verdict,
            api_calls: 0,
            prompt_tokens: 0,
            completion_tokens: 0,
            expert_attempts: 0,
            difficulty: r.difficulty.clone(),
            errors: Vec::new(),
        });
        entry.n += 1;
        if r.final_verdict.is_pass() {
            entry.c += 1;
        }
        entry.api_calls += r.ledger.api_calls;
        entry.prompt_tokens += r.ledger.prompt_tokens;
        entry.completion_tokens += r.ledger.completion_tokens;
        entry.expert_attempts += r.expert_attempts.len() as u64;
        if let Some(e) = &r.error {
            entry.errors.push(format!("{}: {}", e.kind, e.message));
        }
    }

    let mut pass = BTreeMap::new();
    for &k in k_values {
        if let Some((id, t)) = per_task.iter().find(|(_, t)| k == 0 || k > t.n) {
            return Err(BenchError::InvalidArgs(format!("k={k} exceeds the {} sample(s) of task `{id}`", t.n)));
        }
        pass.insert(k, mean_pass_at_k(per_task.values(), k)?);
    }

    let mut by_difficulty: BTreeMap<String, Vec<&TaskMetrics>> = BTreeMap::new();
    for t in per_task.values() {
        if let Some(d) = &t.difficulty {
            by_difficulty.entry(d.clone()).or_default().push(t);
        }
    }
    let per_difficulty = if by_difficulty.is_empty() {
        None
    } else {
        let mut out = BTreeMap::new();
        for (d, tasks) in by_difficulty {
            let mut pk = BTreeMap::new();
            for &k in k_values {
                pk.insert(k, mean_pass_at_k(tasks.iter().copied(), k)?);
            }
            out.insert(d, DifficultyMetrics { tasks: tasks.len() as u32, pass_at_k: pk });
        }
        Some(out)
    };

    Ok(RunMetrics { per_task, pass_at_k: pass, totals, per_difficulty })
}
