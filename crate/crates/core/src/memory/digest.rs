use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::compress::truncate_chars;
use super::{MemoryRecord, MemoryView, RecordId, Region};
use crate::fraction::Fraction;
use crate::types::Task;

/// How many similar records from other tasks are considered for a digest.
const CROSS_TASK_CANDIDATES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigestEntry {
    pub task_id: String,
    pub region: Region,
    pub record: RecordId,
    pub score: Fraction,
    pub summary_text: String,
}

/// Scored past attempts handed to the expert phase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceDigest {
    pub entries: Vec<DigestEntry>,
}

impl ExperienceDigest {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Characters of summary text across entries.
    pub fn total_chars(&self) -> usize {
        self.entries.iter().map(|e| e.summary_text.chars().count()).sum()
    }

    /// Text placed ahead of the expert prompts; empty when there is nothing to say.
    pub fn render(&self) -> String {
        if self.entries.is_empty() {
            return String::new();
        }
        let mut out = String::from("Experience from earlier attempts, best first:\n");
        for e in &self.entries {
            out.push_str(&format!(
                "[{} {} score {:.3}]\n{}\n",
                e.region,
                e.task_id,
                e.score.to_f64(),
                e.summary_text.trim_end()
            ));
        }
        out.push('\n');
        out
    }
}

fn summarize(record: &MemoryRecord) -> String {
    let mut text = record.payload.trim_end().to_string();
    if let Some(tb) = &record.traceback {
        if let Some(last) = tb.lines().rev().find(|l| !l.trim().is_empty()) {
            text.push_str("\n# error: ");
            text.push_str(last.trim());
        }
    }
    text
}

impl<'a> MemoryView<'a> {
    /// Collects scored records for `task`: its own CA1/CA3 entries first, then
    /// similar solutions of other tasks, until `budget_chars` of summary text
    /// is used (the entry that crosses the budget is truncated). Records scored
    /// below `threshold` and repeats of an already selected summary are left
    /// out. The result is ordered by score, then recency.
    pub fn build_digest(&self, task: &Task, budget_chars: usize, threshold: Fraction) -> ExperienceDigest {
        let mut own: Vec<&MemoryRecord> = self
            .records()
            .filter(|r| r.task_id == task.id && matches!(r.region, Region::Ca1 | Region::Ca3))
            .filter(|r| r.score.is_some_and(|s| s >= threshold))
            .collect();
        own.sort_by(|a, b| b.score.cmp(&a.score).then(b.created_at.cmp(&a.created_at)));

        let mut cross: Vec<&MemoryRecord> = self
            .retrieve_similar(&task.description, CROSS_TASK_CANDIDATES, Some(&task.id))
            .into_iter()
            .filter(|r| r.score.is_some_and(|s| s >= threshold))
            .collect();
        cross.sort_by(|a, b| b.score.cmp(&a.score).then(b.created_at.cmp(&a.created_at)));

        let mut entries: Vec<DigestEntry> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut used = 0usize;
        for r in own.into_iter().chain(cross) {
            if used >= budget_chars {
                break;
            }
            let full = summarize(r);
            if !seen.insert(full.clone()) {
                continue;
            }
            let len = full.chars().count();
            let summary_text = if used + len <= budget_chars { full } else { truncate_chars(&full, budget_chars - used) };
            used += summary_text.chars().count();
            entries.push(DigestEntry {
                task_id: r.task_id.clone(),
                region: r.region,
                record: r.created_at,
                score: r.score.unwrap_or(Fraction::ZERO),
                summary_text,
            });
        }
        entries.sort_by(|a, b| b.score.cmp(&a.score).then(b.record.cmp(&a.record)));
        ExperienceDigest { entries }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::task;
    use super::super::MemoryStore;
    use super::*;

    fn threshold() -> Fraction {
        Fraction::new(3, 20)
    }

    #[test]
    fn orders_by_score_and_drops_low_scores() {
        let mut m = MemoryStore::new();
        let t = task("t", "sort a list");
        m.dg_ingest(&t, "plan");
        let a = m.ca3_append("t", 1, "v1", Some("Traceback\nValueError: x")).unwrap();
        let b = m.ca3_append("t", 2, "v2", None).unwrap();
        let c = m.ca3_append("t", 3, "v3", None).unwrap();
        let d = m.ca3_append("t", 4, "v4", None).unwrap();
        m.set_score(a, Fraction::new(2, 5)).unwrap();
        m.set_score(b, Fraction::new(1, 10)).unwrap();
        m.set_score(c, Fraction::new(2, 5)).unwrap();
        m.set_score(d, Fraction::new(3, 10)).unwrap();

        let digest = m.view().build_digest(&t, 4000, threshold());
        let order: Vec<RecordId> = digest.entries.iter().map(|e| e.record).collect();
        assert_eq!(order, vec![c, a, d]);
        assert_eq!(digest.entries[1].summary_text, "v1\n# error: ValueError: x");
        let text = digest.render();
        assert!(text.contains("[ca3 t score 0.400]\nv3\n"), "{text}");
    }

    #[test]
    fn repeated_sources_appear_once() {
        let mut m = MemoryStore::new();
        let t = task("t", "d");
        m.dg_ingest(&t, "plan");
        let a = m.ca1_store("t", "same").unwrap();
        let b = m.ca3_append("t", 1, "same", None).unwrap();
        m.set_score(a, Fraction::new(2, 5)).unwrap();
        m.set_score(b, Fraction::new(2, 5)).unwrap();
        let d = m.view().build_digest(&t, 100, threshold());
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[0].record, b);
    }

    #[test]
    fn budget_is_respected() {
        let mut m = MemoryStore::new();
        let t = task("t", "d");
        m.dg_ingest(&t, "plan");
        for v in 1..=10 {
            let id = m.ca3_append("t", v, &format!("{v:0>100}"), None).unwrap();
            m.set_score(id, Fraction::new(1, 2)).unwrap();
        }
        let digest = m.view().build_digest(&t, 250, threshold());
        assert_eq!(digest.total_chars(), 250);
        assert_eq!(digest.entries.len(), 3);
        assert!(m.view().build_digest(&t, 0, threshold()).is_empty());
    }

    #[test]
    fn includes_similar_solutions_from_other_tasks() {
        let mut shared = MemoryStore::new();
        shared.dg_ingest(&task("old", "reverse a string"), "p");
        shared.ca4_finalize("old", "def r(s):\n    return s[::-1]\n").unwrap();
        let mut local = shared.fork_empty();
        let t = task("new", "reverse the string");
        local.dg_ingest(&t, "p");
        let view = MemoryView::new(vec![&shared, &local]);
        let digest = view.build_digest(&t, 4000, threshold());
        assert_eq!(digest.entries.len(), 1);
        assert_eq!(digest.entries[0].task_id, "old");
        assert_eq!(digest.entries[0].region, Region::Ca4);
        assert_eq!(digest.entries[0].score, Fraction::ONE);
    }
}
