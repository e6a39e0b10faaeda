//! Five-region memory shared by the Super-Role across groups and tasks.
//!
//! * `dg`: raw planner responses, one per group, with the task description.
//! * `ca1`: the initial code produced by each group.
//! * `ca2`: style observations about user-supplied code.
//! * `ca3`: the version chain of candidates with their tracebacks.
//! * `ca4`: at most one compressed, accepted solution per task.
//!
//! Record ids are a monotone sequence and double as the creation timestamp,
//! which keeps retrieval order and persistence independent of wall clocks.

mod compress;
mod digest;
mod persist;
mod style;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fraction::Fraction;
use crate::types::Task;

pub use compress::{compress_source, MAX_COMPRESSED_CHARS};
pub use digest::{DigestEntry, ExperienceDigest};
pub use persist::PersistHook;
pub use style::{extract_hints, Indent, Naming, StyleHint};

/// Task id under which style observations are stored.
pub const USER_STYLE_TASK: &str = "__user__";

/// Minimum description similarity for cross-task retrieval.
pub const MIN_SIMILARITY: Fraction = Fraction::new_const(1, 5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Dg,
    Ca1,
    Ca2,
    Ca3,
    Ca4,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::Dg, Region::Ca1, Region::Ca2, Region::Ca3, Region::Ca4];

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Dg => "dg",
            Region::Ca1 => "ca1",
            Region::Ca2 => "ca2",
            Region::Ca3 => "ca3",
            Region::Ca4 => "ca4",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type RecordId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryRecord {
    pub created_at: RecordId,
    pub region: Region,
    pub task_id: String,
    pub payload: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traceback: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<Fraction>,
    #[serde(default)]
    pub links: Vec<RecordId>,
}

impl MemoryRecord {
    pub fn id(&self) -> RecordId {
        self.created_at
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MemoryError {
    #[error("orphan_record: no design record for task `{task_id}` to link a {region} record to")]
    OrphanRecord { task_id: String, region: Region },
    #[error("version_regression: task `{task_id}` is at version {current}, refusing version {attempted}")]
    VersionRegression { task_id: String, current: u32, attempted: u32 },
    #[error("unknown record {0}")]
    UnknownRecord(RecordId),
    #[error("corrupt_store: {file} line {line}: {message}")]
    CorruptStore { file: String, line: usize, message: String },
    #[error("memory store i/o on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryStore {
    records: BTreeMap<RecordId, MemoryRecord>,
    next_seq: RecordId,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty store whose ids continue after `self`'s, for building a slice
    /// that is later folded back in with [`MemoryStore::merge`].
    pub fn fork_empty(&self) -> Self {
        MemoryStore { records: BTreeMap::new(), next_seq: self.next_seq }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn next_seq(&self) -> RecordId {
        self.next_seq
    }

    pub fn get(&self, id: RecordId) -> Option<&MemoryRecord> {
        self.records.get(&id)
    }

    /// All records in creation order.
    pub fn records(&self) -> impl Iterator<Item = &MemoryRecord> {
        self.records.values()
    }

    pub fn region(&self, region: Region) -> impl Iterator<Item = &MemoryRecord> {
        self.records.values().filter(move |r| r.region == region)
    }

    pub fn task_records<'a>(&'a self, task_id: &'a str) -> impl Iterator<Item = &'a MemoryRecord> {
        self.records.values().filter(move |r| r.task_id == task_id)
    }

    pub fn region_counts(&self) -> BTreeMap<Region, usize> {
        let mut counts: BTreeMap<Region, usize> = Region::ALL.iter().map(|r| (*r, 0)).collect();
        for r in self.records.values() {
            *counts.entry(r.region).or_default() += 1;
        }
        counts
    }

    fn push(&mut self, mut record: MemoryRecord) -> RecordId {
        let id = self.next_seq;
        self.next_seq += 1;
        record.created_at = id;
        self.records.insert(id, record);
        id
    }

    fn latest(&self, task_id: &str, region: Region) -> Option<&MemoryRecord> {
        self.records.values().rev().find(|r| r.region == region && r.task_id == task_id)
    }

    fn first(&self, task_id: &str, region: Region) -> Option<&MemoryRecord> {
        self.records.values().find(|r| r.region == region && r.task_id == task_id)
    }

    /// Highest CA3 version stored for `task_id`.
    pub fn max_ca3_version(&self, task_id: &str) -> Option<u32> {
        self.task_records(task_id).filter(|r| r.region == Region::Ca3).filter_map(|r| r.version).max()
    }

    /// CA3 records of a task in append order.
    pub fn ca3_chain<'a>(&'a self, task_id: &'a str) -> Vec<&'a MemoryRecord> {
        self.task_records(task_id).filter(|r| r.region == Region::Ca3).collect()
    }

    pub fn ca4(&self, task_id: &str) -> Option<&MemoryRecord> {
        self.latest(task_id, Region::Ca4)
    }

    /// Stores a planner response for `task`.
    pub fn dg_ingest(&mut self, task: &Task, raw_response: &str) -> RecordId {
        self.push(MemoryRecord {
            created_at: 0,
            region: Region::Dg,
            task_id: task.id.clone(),
            payload: raw_response.to_string(),
            description: Some(task.description.clone()),
            traceback: None,
            version: None,
            score: None,
            links: Vec::new(),
        })
    }

    /// Stores a group's initial code, linked to the task's latest design record.
    pub fn ca1_store(&mut self, task_id: &str, initial_response: &str) -> Result<RecordId, MemoryError> {
        let dg = self.design_link(task_id, Region::Ca1)?;
        Ok(self.push(MemoryRecord {
            created_at: 0,
            region: Region::Ca1,
            task_id: task_id.to_string(),
            payload: initial_response.to_string(),
            description: None,
            traceback: None,
            version: None,
            score: None,
            links: vec![dg],
        }))
    }

    /// Records style hints from user code. Returns the number of records
    /// added; text that does not parse is kept as one verbatim record.
    pub fn ca2_load_user_code(&mut self, source: &str) -> usize {
        let payloads: Vec<String> = match extract_hints(source) {
            Some(hints) => hints.iter().map(|h| h.to_string()).collect(),
            None => vec![source.to_string()],
        };
        let added = payloads.len();
        for payload in payloads {
            self.push(MemoryRecord {
                created_at: 0,
                region: Region::Ca2,
                task_id: USER_STYLE_TASK.to_string(),
                payload,
                description: None,
                traceback: None,
                version: None,
                score: None,
                links: Vec::new(),
            });
        }
        added
    }

    /// Style guidance for prompts, when any style records exist.
    pub fn ca2_preamble(&self) -> Option<String> {
        let notes: Vec<&str> = self.region(Region::Ca2).map(|r| r.payload.as_str()).collect();
        if notes.is_empty() {
            return None;
        }
        let mut text = String::from("Follow the user's coding style:\n");
        for n in notes {
            text.push_str("- ");
            text.push_str(n);
            text.push('\n');
        }
        Some(text)
    }

    /// Appends a candidate version; versions must strictly increase per task.
    pub fn ca3_append(
        &mut self,
        task_id: &str,
        version: u32,
        source: &str,
        traceback: Option<&str>,
    ) -> Result<RecordId, MemoryError> {
        if let Some(current) = self.max_ca3_version(task_id) {
            if version <= current {
                return Err(MemoryError::VersionRegression {
                    task_id: task_id.to_string(),
                    current,
                    attempted: version,
                });
            }
        }
        let dg = self.design_link(task_id, Region::Ca3)?;
        let mut links = vec![dg];
        if let Some(prev) = self.latest(task_id, Region::Ca3) {
            links.push(prev.id());
        }
        Ok(self.push(MemoryRecord {
            created_at: 0,
            region: Region::Ca3,
            task_id: task_id.to_string(),
            payload: source.to_string(),
            description: None,
            traceback: traceback.map(str::to_string),
            version: Some(version),
            score: None,
            links,
        }))
    }

    /// Stores the accepted solution of a task, replacing any earlier one.
    pub fn ca4_finalize(&mut self, task_id: &str, final_source: &str) -> Result<RecordId, MemoryError> {
        let origin = self
            .first(task_id, Region::Dg)
            .map(|r| r.id())
            .ok_or_else(|| MemoryError::OrphanRecord { task_id: task_id.to_string(), region: Region::Ca4 })?;
        let mut links = vec![origin];
        if let Some(head) = self.latest(task_id, Region::Ca3) {
            links.push(head.id());
        }
        self.records.retain(|_, r| !(r.region == Region::Ca4 && r.task_id == task_id));
        Ok(self.push(MemoryRecord {
            created_at: 0,
            region: Region::Ca4,
            task_id: task_id.to_string(),
            payload: compress_source(final_source),
            description: None,
            traceback: None,
            version: None,
            score: Some(Fraction::ONE),
            links,
        }))
    }

    pub fn set_score(&mut self, id: RecordId, score: Fraction) -> Result<(), MemoryError> {
        let record = self.records.get_mut(&id).ok_or(MemoryError::UnknownRecord(id))?;
        record.score = Some(score);
        Ok(())
    }

    fn design_link(&self, task_id: &str, region: Region) -> Result<RecordId, MemoryError> {
        self.latest(task_id, Region::Dg)
            .map(|r| r.id())
            .ok_or_else(|| MemoryError::OrphanRecord { task_id: task_id.to_string(), region })
    }

    pub fn view(&self) -> MemoryView<'_> {
        MemoryView::new(vec![self])
    }

    pub fn retrieve_similar(&self, description: &str, k: usize) -> Vec<&MemoryRecord> {
        self.view().retrieve_similar(description, k, None)
    }

    /// Folds a slice built from [`MemoryStore::fork_empty`] into this store.
    ///
    /// Incoming records receive fresh ids in their original order; links into
    /// this store are kept, links inside the slice are remapped, and chain
    /// records that start a slice are linked to this store's CA3 head. A CA4 record
    /// replaces this store's CA4 for the same task. Incoming CA3 versions are
    /// shifted up when they would not exceed the versions already stored.
    pub fn merge(&mut self, slice: MemoryStore) {
        let mut shift: BTreeMap<String, u32> = BTreeMap::new();
        let tasks: BTreeSet<String> = slice.records.values().map(|r| r.task_id.clone()).collect();
        for task in &tasks {
            let incoming_min = slice.ca3_chain(task).iter().filter_map(|r| r.version).min();
            if let (Some(existing), Some(min)) = (self.max_ca3_version(task), incoming_min) {
                if min <= existing {
                    shift.insert(task.clone(), existing - min + 1);
                }
            }
        }

        let mut remap: BTreeMap<RecordId, RecordId> = BTreeMap::new();
        for (old_id, mut record) in slice.records {
            record.links = record
                .links
                .iter()
                .filter_map(|l| match remap.get(l) {
                    Some(new) => Some(*new),
                    None => self.records.contains_key(l).then_some(*l),
                })
                .collect();
            if record.region == Region::Ca3 {
                if let (Some(v), Some(s)) = (record.version, shift.get(&record.task_id)) {
                    record.version = Some(v + s);
                }
            }
            if matches!(record.region, Region::Ca3 | Region::Ca4) {
                let links_chain = record
                    .links
                    .iter()
                    .any(|l| self.records.get(l).is_some_and(|t| t.region == Region::Ca3));
                if !links_chain {
                    if let Some(head) = self.latest(&record.task_id, Region::Ca3) {
                        record.links.push(head.id());
                    }
                }
            }
            if record.region == Region::Ca4 {
                let task = record.task_id.clone();
                self.records.retain(|_, r| !(r.region == Region::Ca4 && r.task_id == task));
            }
            let new_id = self.push(record);
            remap.insert(old_id, new_id);
        }
        self.next_seq = self.next_seq.max(slice.next_seq);
    }

    /// Structural invariant violations; empty means consistent.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut ca4_per_task: BTreeMap<&str, usize> = BTreeMap::new();
        let mut last_version: BTreeMap<&str, u32> = BTreeMap::new();
        for (id, r) in &self.records {
            if *id != r.created_at {
                problems.push(format!("record {id} has created_at {}", r.created_at));
            }
            if *id >= self.next_seq {
                problems.push(format!("record {id} is not below next_seq {}", self.next_seq));
            }
            for l in &r.links {
                if !self.records.contains_key(l) {
                    problems.push(format!("record {id} links to missing record {l}"));
                } else if *l >= *id {
                    problems.push(format!("record {id} links forward to {l}"));
                }
            }
            match r.region {
                Region::Dg | Region::Ca2 => {}
                Region::Ca1 | Region::Ca3 | Region::Ca4 => {
                    let reaches_dg = r.links.iter().any(|l| {
                        self.records.get(l).is_some_and(|t| t.region == Region::Dg && t.task_id == r.task_id)
                    });
                    if !reaches_dg {
                        problems.push(format!("{} record {id} has no design link", r.region));
                    }
                }
            }
            if r.region == Region::Ca3 {
                match r.version {
                    None => problems.push(format!("ca3 record {id} has no version")),
                    Some(v) => {
                        if let Some(prev) = last_version.insert(&r.task_id, v) {
                            if v <= prev {
                                problems.push(format!("task {} ca3 version {v} follows {prev}", r.task_id));
                            }
                        }
                    }
                }
            }
            if r.region == Region::Ca4 {
                *ca4_per_task.entry(&r.task_id).or_default() += 1;
                let had_ca3 = self
                    .records
                    .range(..id)
                    .any(|(_, p)| p.region == Region::Ca3 && p.task_id == r.task_id);
                let links_ca3 = r.links.iter().any(|l| {
                    self.records.get(l).is_some_and(|t| t.region == Region::Ca3 && t.task_id == r.task_id)
                });
                if had_ca3 && !links_ca3 {
                    problems.push(format!("ca4 record {id} does not link to the ca3 chain"));
                }
            }
        }
        for (task, n) in ca4_per_task {
            if n > 1 {
                problems.push(format!("task {task} has {n} ca4 records"));
            }
        }
        problems
    }
}

/// Read-only union of several stores, used when a task works on a private
/// slice while still consulting the shared store.
#[derive(Debug, Clone)]
pub struct MemoryView<'a> {
    layers: Vec<&'a MemoryStore>,
}

fn tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Jaccard similarity of lowercase alphanumeric token sets.
pub fn similarity(a: &str, b: &str) -> Fraction {
    let ta = tokens(a);
    let tb = tokens(b);
    let union = ta.union(&tb).count() as u64;
    if union == 0 {
        return Fraction::ZERO;
    }
    Fraction::new(ta.intersection(&tb).count() as u64, union)
}

impl<'a> MemoryView<'a> {
    pub fn new(layers: Vec<&'a MemoryStore>) -> Self {
        MemoryView { layers }
    }

    pub fn records(&self) -> impl Iterator<Item = &'a MemoryRecord> + '_ {
        self.layers.iter().flat_map(|s| s.records())
    }

    /// Description of each task, taken from its earliest DG record.
    fn descriptions(&self) -> BTreeMap<&'a str, (RecordId, &'a str)> {
        let mut out: BTreeMap<&'a str, (RecordId, &'a str)> = BTreeMap::new();
        for r in self.records().filter(|r| r.region == Region::Dg) {
            let Some(d) = r.description.as_deref() else { continue };
            let slot = out.entry(r.task_id.as_str()).or_insert((r.created_at, d));
            if r.created_at < slot.0 {
                *slot = (r.created_at, d);
            }
        }
        out
    }

    /// Up to `k` CA4 then CA1 records whose task description is similar to
    /// `description`, each group ordered by similarity then recency.
    pub fn retrieve_similar(&self, description: &str, k: usize, exclude_task: Option<&str>) -> Vec<&'a MemoryRecord> {
        let mut scored: Vec<(Region, Fraction, RecordId, &'a MemoryRecord)> = Vec::new();
        let descriptions = self.descriptions();
        let mut cache: BTreeMap<&str, Fraction> = BTreeMap::new();
        for r in self.records() {
            if !matches!(r.region, Region::Ca4 | Region::Ca1) || Some(r.task_id.as_str()) == exclude_task {
                continue;
            }
            let sim = *cache.entry(r.task_id.as_str()).or_insert_with(|| {
                descriptions.get(r.task_id.as_str()).map_or(Fraction::ZERO, |(_, d)| similarity(description, d))
            });
            if sim >= MIN_SIMILARITY {
                scored.push((r.region, sim, r.created_at, r));
            }
        }
        scored.sort_by(|a, b| {
            let rank = |r: Region| if r == Region::Ca4 { 0 } else { 1 };
            rank(a.0).cmp(&rank(b.0)).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2))
        });
        scored.into_iter().take(k).map(|s| s.3).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Family, TestCase, TestMode};

    pub(crate) fn task(id: &str, description: &str) -> Task {
        Task {
            id: id.into(),
            description: description.into(),
            sample_io: vec![TestCase::new("assert True", "", TestMode::AssertExpr)],
            entry_point: None,
            family: Family::Basic,
            difficulty: None,
        }
    }

    #[test]
    fn regions_link_back_to_design() {
        let mut m = MemoryStore::new();
        let t = task("t1", "add two numbers");
        let dg = m.dg_ingest(&t, "plan text");
        let c1 = m.ca1_store("t1", "def add(a, b): return a + b").unwrap();
        let v1 = m.ca3_append("t1", 1, "def add(a, b): return a - b", Some("AssertionError")).unwrap();
        let v2 = m.ca3_append("t1", 2, "def add(a, b): return a + b", None).unwrap();
        let f = m.ca4_finalize("t1", "# done\ndef add(a, b):\n    return a  +  b\n").unwrap();
        assert_eq!(m.get(c1).unwrap().links, vec![dg]);
        assert_eq!(m.get(v1).unwrap().links, vec![dg]);
        assert_eq!(m.get(v2).unwrap().links, vec![dg, v1]);
        assert_eq!(m.get(f).unwrap().links, vec![dg, v2]);
        assert_eq!(m.get(f).unwrap().payload, "def add(a, b):\n    return a + b\n");
        assert_eq!(m.get(v1).unwrap().traceback.as_deref(), Some("AssertionError"));
        assert!(m.check_invariants().is_empty());
    }

    #[test]
    fn version_regression_and_orphans_rejected() {
        let mut m = MemoryStore::new();
        assert!(matches!(m.ca1_store("t", "x"), Err(MemoryError::OrphanRecord { .. })));
        assert!(matches!(m.ca3_append("t", 1, "x", None), Err(MemoryError::OrphanRecord { .. })));
        assert!(matches!(m.ca4_finalize("t", "x"), Err(MemoryError::OrphanRecord { .. })));
        m.dg_ingest(&task("t", "d"), "p");
        m.ca3_append("t", 3, "x", None).unwrap();
        let err = m.ca3_append("t", 3, "y", None).unwrap_err();
        assert!(matches!(err, MemoryError::VersionRegression { current: 3, attempted: 3, .. }));
        assert!(err.to_string().starts_with("version_regression"));
        assert!(matches!(m.ca3_append("t", 2, "y", None), Err(MemoryError::VersionRegression { .. })));
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn finalize_replaces_previous_solution() {
        let mut m = MemoryStore::new();
        m.dg_ingest(&task("t", "d"), "p");
        m.ca4_finalize("t", "a = 1").unwrap();
        m.ca4_finalize("t", "a = 2").unwrap();
        assert_eq!(m.region(Region::Ca4).count(), 1);
        assert_eq!(m.ca4("t").unwrap().payload, "a = 2\n");
    }

    #[test]
    fn similarity_is_jaccard_over_tokens() {
        assert_eq!(similarity("reverse a string", "Reverse the string!"), Fraction::new(2, 4));
        assert_eq!(similarity("", ""), Fraction::ZERO);
        assert_eq!(similarity("a b", "c d"), Fraction::ZERO);
    }

    #[test]
    fn retrieval_prefers_similar_final_solutions() {
        let mut m = MemoryStore::new();
        m.dg_ingest(&task("rev", "reverse a string"), "p");
        m.ca4_finalize("rev", "def r(s): return s[::-1]").unwrap();
        m.dg_ingest(&task("sum", "sum a list of numbers"), "p");
        m.ca4_finalize("sum", "def s(xs): return sum(xs)").unwrap();
        m.ca1_store("sum", "def s(xs): return 0").unwrap();

        let hits = m.retrieve_similar("reverse the string", 5);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].task_id, "rev");
        assert_eq!(hits[0].region, Region::Ca4);

        let both = m.retrieve_similar("a list of strings to reverse", 5);
        let regions: Vec<(Region, &str)> = both.iter().map(|r| (r.region, r.task_id.as_str())).collect();
        // sim(rev) = 2/7, sim(sum) = 3/8
        assert_eq!(regions, vec![(Region::Ca4, "sum"), (Region::Ca4, "rev"), (Region::Ca1, "sum")]);
        assert_eq!(m.retrieve_similar("a list of strings to reverse", 1).len(), 1);
    }

    #[test]
    fn style_records_and_preamble() {
        let mut m = MemoryStore::new();
        assert!(m.ca2_preamble().is_none());
        let n = m.ca2_load_user_code("def my_func(x):\n    my_value = x\n    return my_value\n");
        assert_eq!(n, 3);
        let pre = m.ca2_preamble().unwrap();
        assert!(pre.contains("naming: snake_case") && pre.contains("indent: 4"), "{pre}");
        assert_eq!(m.ca2_load_user_code("this is { not code"), 1);
        assert_eq!(m.region(Region::Ca2).last().unwrap().payload, "this is { not code");
    }

    #[test]
    fn merge_remaps_ids_and_links() {
        let mut base = MemoryStore::new();
        base.dg_ingest(&task("a", "first"), "p");
        base.ca3_append("a", 1, "x", None).unwrap();

        let mut slice = base.fork_empty();
        slice.dg_ingest(&task("b", "second"), "p");
        slice.ca3_append("b", 1, "y", None).unwrap();
        slice.ca4_finalize("b", "y").unwrap();

        let mut other = base.fork_empty();
        other.dg_ingest(&task("a", "first"), "p2");
        other.ca3_append("a", 1, "z", None).unwrap();

        base.merge(slice);
        base.merge(other);
        assert!(base.check_invariants().is_empty(), "{:?}", base.check_invariants());
        assert_eq!(base.len(), 7);
        let versions: Vec<u32> = base.ca3_chain("a").iter().filter_map(|r| r.version).collect();
        assert_eq!(versions, vec![1, 2]);
        let ids: Vec<RecordId> = base.records().map(|r| r.id()).collect();
        assert_eq!(ids, (0..7).collect::<Vec<_>>());
    }
}
