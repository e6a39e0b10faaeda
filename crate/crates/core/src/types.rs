//! Domain types shared across the engine.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::backend::BackendConfig;
use crate::fraction::Fraction;

/// Benchmark family. Each family has its own prompt variants and test protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// HumanEval / MBPP style problems.
    Basic,
    /// APPS style problems with a required function name.
    Apps,
    /// xCodeEval / CodeContest problems solved as a single string function.
    Contest,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Basic, Family::Apps, Family::Contest];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Basic => "basic",
            Family::Apps => "apps",
            Family::Contest => "contest",
        }
    }

    pub fn default_mode(&self) -> TestMode {
        match self {
            Family::Basic => TestMode::AssertExpr,
            Family::Apps => TestMode::CallCompare,
            Family::Contest => TestMode::StringFn,
        }
    }

    pub fn allows(&self, mode: TestMode) -> bool {
        match self {
            Family::Basic => matches!(mode, TestMode::AssertExpr | TestMode::CallCompare),
            Family::Apps => mode == TestMode::CallCompare,
            Family::Contest => mode == TestMode::StringFn,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Family::Basic),
            "apps" => Ok(Family::Apps),
            "contest" => Ok(Family::Contest),
            other => Err(format!("unknown family `{other}` (expected basic, apps or contest)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    /// `input` is a Python assert statement; `expected` is informational.
    AssertExpr,
    /// `input` is a call expression (or argument list for the entry point) whose
    /// value is compared with `expected`.
    CallCompare,
    /// `input` is the raw string handed to the single solution function.
    StringFn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    #[serde(default)]
    pub expected: String,
    pub mode: TestMode,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected: impl Into<String>, mode: TestMode) -> Self {
        TestCase { input: input.into(), expected: expected.into(), mode }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub description: String,
    pub sample_io: Vec<TestCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_point: Option<String>,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
}

/// Returns every invariant violation of a single task. Empty means valid.
pub fn validate_task(task: &Task) -> Vec<String> {
    let mut violations = Vec::new();
    if task.id.trim().is_empty() {
        violations.push("id empty".to_string());
    }
    if task.sample_io.is_empty() {
        violations.push("sample_io empty".to_string());
    }
    if task.family == Family::Apps
        && task.entry_point.as_deref().is_none_or(|e| e.trim().is_empty())
    {
        violations.push("apps task missing entry_point".to_string());
    }
    for (i, case) in task.sample_io.iter().enumerate() {
        if !task.family.allows(case.mode) {
            violations.push(format!(
                "case {} mode {:?} inconsistent with family {}",
                i + 1,
                case.mode,
                task.family
            ));
        }
    }
    violations
}

/// Validates a whole dataset, adding id-uniqueness on top of [`validate_task`].
pub fn validate_dataset(tasks: &[Task]) -> Vec<(String, Vec<String>)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for task in tasks {
        let mut v = validate_task(task);
        if !seen.insert(task.id.as_str()) {
            v.push(format!("duplicate id `{}`", task.id));
        }
        if !v.is_empty() {
            out.push((task.id.clone(), v));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RoleKind {
    Planner,
    Coder,
    Debugger,
}

impl RoleKind {
    pub const ALL: [RoleKind; 3] = [RoleKind::Planner, RoleKind::Coder, RoleKind::Debugger];

    /// Seat order taken by the Super-Role across groups 1..=3.
    pub const ROTATION: [RoleKind; 3] = [RoleKind::Debugger, RoleKind::Coder, RoleKind::Planner];
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Planner,
    Coder,
    Debugger,
    SuperRole,
}

impl From<RoleKind> for Origin {
    fn from(r: RoleKind) -> Self {
        match r {
            RoleKind::Planner => Origin::Planner,
            RoleKind::Coder => Origin::Coder,
            RoleKind::Debugger => Origin::Debugger,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStage {
    PlanGuidedCode,
    GroupDebugged,
    ExpertInitial,
    ExpertRefined,
}

impl CandidateStage {
    pub fn has_parent(&self) -> bool {
        matches!(self, CandidateStage::GroupDebugged | CandidateStage::ExpertRefined)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: String,
    pub stage: CandidateStage,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_version: Option<u32>,
    pub role_of_origin: Origin,
}

impl Candidate {
    /// Checks the parent/stage pairing and that the version grows from its parent.
    pub fn is_consistent(&self) -> bool {
        match self.parent_version {
            Some(p) => self.stage.has_parent() && p < self.version,
            None => !self.stage.has_parent(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub case_index: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Ok,
    RuntimeError,
    Timeout,
    HarnessError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub per_case: Vec<CaseVerdict>,
    pub pass_fraction: Fraction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traceback: Option<String>,
    /// Wall clock is kept out of serialized results so replays stay byte-identical.
    #[serde(skip)]
    pub wall_time_ms: u64,
    pub status: ExecStatus,
}

impl ExecutionReport {
    /// Builds a report from per-case verdicts; `pass_fraction` is derived exactly.
    pub fn from_cases(
        per_case: Vec<CaseVerdict>,
        status: ExecStatus,
        traceback: Option<String>,
        wall_time_ms: u64,
    ) -> Self {
        let total = per_case.len() as u64;
        let passed = per_case.iter().filter(|c| c.passed).count() as u64;
        let pass_fraction = if total == 0 { Fraction::ZERO } else { Fraction::new(passed, total) };
        ExecutionReport { per_case, pass_fraction, traceback, wall_time_ms, status }
    }

    /// A report where nothing ran, e.g. an unusable candidate.
    pub fn harness_failure(case_count: usize, message: impl Into<String>) -> Self {
        let per_case = (1..=case_count).map(|i| CaseVerdict { case_index: i, passed: false }).collect();
        Self::from_cases(per_case, ExecStatus::HarnessError, Some(message.into()), 0)
    }

    pub fn passed_count(&self) -> usize {
        self.per_case.iter().filter(|c| c.passed).count()
    }
}

/// Initial per-role weights applied to importance scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleWeights {
    pub planner: Fraction,
    pub coder: Fraction,
    pub debugger: Fraction,
}

impl Default for RoleWeights {
    fn default() -> Self {
        RoleWeights {
            planner: Fraction::new(2, 5),
            coder: Fraction::new(2, 5),
            debugger: Fraction::new(3, 10),
        }
    }
}

impl RoleWeights {
    pub fn get(&self, role: RoleKind) -> Fraction {
        match role {
            RoleKind::Planner => self.planner,
            RoleKind::Coder => self.coder,
            RoleKind::Debugger => self.debugger,
        }
    }

    pub fn max(&self) -> Fraction {
        self.planner.max(self.coder).max(self.debugger)
    }

    pub fn scaled(&self, factor: Fraction) -> RoleWeights {
        RoleWeights {
            planner: self.planner * factor,
            coder: self.coder * factor,
            debugger: self.debugger * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub weights: RoleWeights,
    /// Expert-phase attempt bound `t`.
    pub expert_attempts_t: u32,
    pub group_debug_limit: u32,
    pub seed: u64,
    pub sandbox_timeout_ms: u64,
    pub max_output_bytes: usize,
    pub interpreter_command: String,
    /// Upper bound on concurrent sandbox child processes; 0 means logical CPU count.
    pub max_sandboxes: usize,
    pub digest_budget_chars: usize,
    pub digest_score_threshold: Fraction,
    /// Independent pipeline runs per task (the `n` of pass@k).
    pub samples_per_task: u32,
    pub templates_dir: Option<String>,
    pub backend: BackendConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            weights: RoleWeights::default(),
            expert_attempts_t: 5,
            group_debug_limit: 1,
            seed: 0,
            sandbox_timeout_ms: 10_000,
            max_output_bytes: 64 * 1024,
            interpreter_command: "python3".to_string(),
            max_sandboxes: 0,
            digest_budget_chars: 4000,
            digest_score_threshold: Fraction::new(3, 20),
            samples_per_task: 1,
            templates_dir: None,
            backend: BackendConfig::default(),
        }
    }
}

impl EngineConfig {
    /// Every violation, including backend settings.
    pub fn validate(&self) -> Vec<String> {
        let mut v = self.validate_engine();
        v.extend(self.backend.validate());
        v
    }

    /// Violations of everything except the backend section.
    pub fn validate_engine(&self) -> Vec<String> {
        let mut v = Vec::new();
        for role in RoleKind::ALL {
            let w = self.weights.get(role);
            if w.is_zero() || w > Fraction::ONE {
                v.push(format!("weight for {role} must be in (0,1], got {w}"));
            }
        }
        if self.expert_attempts_t == 0 {
            v.push("expert_attempts_t must be >= 1".into());
        }
        if self.group_debug_limit == 0 {
            v.push("group_debug_limit must be >= 1".into());
        }
        if self.sandbox_timeout_ms == 0 {
            v.push("sandbox_timeout_ms must be positive".into());
        }
        if self.max_output_bytes == 0 {
            v.push("max_output_bytes must be positive".into());
        }
        if self.interpreter_command.trim().is_empty() {
            v.push("interpreter_command empty".into());
        }
        if self.digest_budget_chars == 0 {
            v.push("digest_budget_chars must be positive".into());
        }
        if self.samples_per_task == 0 {
            v.push("samples_per_task must be >= 1".into());
        }
        v
    }
}
