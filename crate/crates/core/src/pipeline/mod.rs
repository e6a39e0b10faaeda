//! The reverse-order traversal: three groups with the Super-Role seated as
//! Debugger, Coder and Planner in turn, then the bounded expert phase.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::{BackendError, ChatBackend, PromptHash, SentPrompt, Session, UsageLedger};
use crate::fraction::Fraction;
use crate::memory::{MemoryError, MemoryStore, MemoryView};
use crate::prompts::{format_test_cases, select, PromptError, PromptStage, SlotMap, TemplateSet};
use crate::sandbox::{build_harness, extract_code, judge, Sandbox, SandboxError, SandboxLimits};
use crate::types::{
    validate_task, Candidate, CandidateStage, EngineConfig, ExecutionReport, Family, Origin, RoleKind, RoleWeights,
    Task, Verdict,
};

/// `importance × weight(role)`, exact.
pub fn score(importance: Fraction, role: RoleKind, weights: &RoleWeights) -> Fraction {
    importance * weights.get(role)
}

/// Seed of the independent stream a task sample draws its seats from.
pub fn task_seed(run_seed: u64, task_id: &str, sample_index: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update((task_id.len() as u64).to_le_bytes());
    h.update(task_id.as_bytes());
    h.update(sample_index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// One of the three seats of a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seat {
    pub role: RoleKind,
    pub seed: u64,
    pub super_role: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub group_index: u8,
    pub super_role_as: RoleKind,
    pub seats: Vec<Seat>,
    pub plan_text: String,
    pub candidate: Candidate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_debug_candidate: Option<Candidate>,
    pub debug_passes: u32,
    pub report: ExecutionReport,
    pub importance: Fraction,
    pub final_score: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertAttempt {
    pub candidate: Candidate,
    pub report: ExecutionReport,
}

/// Why a task ended without a normal verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskError {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task_id: String,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
    pub sample_index: u32,
    pub group_outcomes: Vec<GroupOutcome>,
    pub expert_attempts: Vec<ExpertAttempt>,
    pub final_verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_candidate: Option<Candidate>,
    pub ledger: UsageLedger,
    pub prompt_hashes: Vec<PromptHash>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<TaskError>,
    /// Prompts as sent, for inspection; not part of the serialized result.
    #[serde(skip)]
    pub prompts: Vec<SentPrompt>,
}

/// A finished task sample together with the memory it wrote.
#[derive(Debug)]
pub struct TaskOutcome {
    pub result: TaskResult,
    pub memory: MemoryStore,
}

#[derive(Debug)]
enum StepError {
    Backend(BackendError),
    Prompt(PromptError),
    Memory(MemoryError),
}

impl From<BackendError> for StepError {
    fn from(e: BackendError) -> Self {
        StepError::Backend(e)
    }
}

impl From<PromptError> for StepError {
    fn from(e: PromptError) -> Self {
        StepError::Prompt(e)
    }
}

impl From<MemoryError> for StepError {
    fn from(e: MemoryError) -> Self {
        StepError::Memory(e)
    }
}

impl From<StepError> for TaskError {
    fn from(e: StepError) -> Self {
        let (kind, message) = match e {
            StepError::Backend(b) => (b.kind(), b.to_string()),
            StepError::Prompt(p) => ("prompt_error", p.to_string()),
            StepError::Memory(m) => ("memory_error", m.to_string()),
        };
        TaskError { kind: kind.to_string(), message }
    }
}

pub struct Engine {
    config: EngineConfig,
    templates: TemplateSet,
    sandbox: Sandbox,
    backend: Arc<dyn ChatBackend>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("config", &self.config).field("backend", &self.backend.name()).finish()
    }
}

impl Engine {
    /// Builds an engine around an already constructed backend. The backend
    /// section of `config` is not consulted.
    pub fn new(config: EngineConfig, backend: Arc<dyn ChatBackend>) -> Result<Engine, EngineError> {
        let problems = config.validate_engine();
        if !problems.is_empty() {
            return Err(EngineError::InvalidConfig(problems));
        }
        let templates = match &config.templates_dir {
            Some(dir) => TemplateSet::with_overrides(dir)?,
            None => TemplateSet::builtin(),
        };
        let limits = SandboxLimits { timeout_ms: config.sandbox_timeout_ms, max_output_bytes: config.max_output_bytes };
        let mut sandbox = Sandbox::new(&config.interpreter_command, limits)?;
        if config.max_sandboxes > 0 {
            sandbox = sandbox.with_max_concurrent(config.max_sandboxes);
        }
        sandbox.probe()?;
        Ok(Engine { config, templates, sandbox, backend })
    }

    /// Builds the backend described by `config` as well.
    pub fn from_config(config: EngineConfig) -> Result<Engine, EngineError> {
        let problems = config.validate();
        if !problems.is_empty() {
            return Err(EngineError::InvalidConfig(problems));
        }
        let backend = config.backend.build()?;
        Engine::new(config, backend)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn sandbox(&self) -> &Sandbox {
        &self.sandbox
    }

    /// Runs one sample of `task`. Memory written during the run goes into a
    /// fresh slice of `shared`, returned for merging. Failures never abort:
    /// they are reported through `TaskResult::error` with a fail verdict.
    pub fn solve_task(&self, task: &Task, sample_index: u32, shared: &MemoryStore) -> TaskOutcome {
        let mut run = TaskRun::new(self, task, sample_index, shared);
        let problems = validate_task(task);
        let error = if problems.is_empty() {
            run.execute().err().map(TaskError::from)
        } else {
            Some(TaskError { kind: "invalid_task".into(), message: problems.join("; ") })
        };
        run.finish(error)
    }
}

struct TaskRun<'a> {
    engine: &'a Engine,
    task: &'a Task,
    sample_index: u32,
    shared: &'a MemoryStore,
    slice: MemoryStore,
    session: Session<'a>,
    rng: ChaCha8Rng,
    super_seed: u64,
    next_version: u32,
    groups: Vec<GroupOutcome>,
    attempts: Vec<ExpertAttempt>,
}

impl<'a> TaskRun<'a> {
    fn new(engine: &'a Engine, task: &'a Task, sample_index: u32, shared: &'a MemoryStore) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(engine.config.seed, &task.id, sample_index));
        let super_seed = rng.next_u64();
        TaskRun {
            engine,
            task,
            sample_index,
            shared,
            slice: shared.fork_empty(),
            session: Session::new(engine.backend.as_ref(), task.id.clone()),
            rng,
            super_seed,
            next_version: shared.max_ca3_version(&task.id).unwrap_or(0) + 1,
            groups: Vec::new(),
            attempts: Vec::new(),
        }
    }

    fn execute(&mut self) -> Result<(), StepError> {
        for (i, role) in RoleKind::ROTATION.into_iter().enumerate() {
            let outcome = self.run_group(i as u8 + 1, role)?;
            self.groups.push(outcome);
        }
        self.run_expert_phase()
    }

    fn finish(self, error: Option<TaskError>) -> TaskOutcome {
        let passed = error.is_none() && self.attempts.last().is_some_and(|a| judge(&a.report).verdict.is_pass());
        let final_candidate = self.attempts.last().map(|a| a.candidate.clone());
        let prompt_hashes = self.session.prompt_hashes();
        let (ledger, prompts) = self.session.into_parts();
        TaskOutcome {
            result: TaskResult {
                task_id: self.task.id.clone(),
                family: self.task.family,
                difficulty: self.task.difficulty.clone(),
                sample_index: self.sample_index,
                group_outcomes: self.groups,
                expert_attempts: self.attempts,
                final_verdict: if passed { Verdict::Pass } else { Verdict::Fail },
                final_candidate,
                ledger,
                prompt_hashes,
                error,
                prompts,
            },
            memory: self.slice,
        }
    }

    fn base_slots(&self) -> SlotMap {
        let prompt_name = match (&self.task.entry_point, self.task.family) {
            (Some(ep), Family::Apps) => format!(": {ep}"),
            _ => String::new(),
        };
        SlotMap::new()
            .with("question", self.task.description.as_str())
            .with("test_case", format_test_cases(self.task))
            .with("prompt_name", prompt_name)
            .with("experience_digest", "")
    }

    fn render(&self, stage: PromptStage, slots: &SlotMap) -> Result<String, PromptError> {
        self.engine.templates.render(select(stage, self.task.family), slots)
    }

    fn take_version(&mut self) -> u32 {
        let v = self.next_version;
        self.next_version += 1;
        v
    }

    fn evaluate(&self, source: &str) -> ExecutionReport {
        let cases = &self.task.sample_io;
        let harness = match build_harness(source, cases, self.task.family, self.task.entry_point.as_deref()) {
            Ok(h) => h,
            Err(e) => return ExecutionReport::harness_failure(cases.len(), e.to_string()),
        };
        match self.engine.sandbox.execute(&harness) {
            Ok(report) => report,
            Err(e) => ExecutionReport::harness_failure(cases.len(), e.to_string()),
        }
    }

    fn origin(seat: RoleKind, super_as: RoleKind) -> Origin {
        if seat == super_as {
            Origin::SuperRole
        } else {
            Origin::from(seat)
        }
    }

    fn seat_seed(seats: &[Seat], role: RoleKind) -> u64 {
        seats.iter().find(|s| s.role == role).map(|s| s.seed).expect("every role has a seat")
    }

    fn run_group(&mut self, index: u8, super_as: RoleKind) -> Result<GroupOutcome, StepError> {
        let seats: Vec<Seat> = RoleKind::ALL
            .into_iter()
            .map(|role| {
                if role == super_as {
                    Seat { role, seed: self.super_seed, super_role: true }
                } else {
                    Seat { role, seed: self.rng.next_u64(), super_role: false }
                }
            })
            .collect();
        let weights = self.engine.config.weights;
        let label = |stage: &str| format!("group{index}.{stage}");

        let plan_prompt = self.render(PromptStage::Plan, &self.base_slots())?;
        let plan = self.session.complete_seeded(
            &plan_prompt,
            &label("plan"),
            Some(Self::seat_seed(&seats, RoleKind::Planner)),
        )?;
        let plan_text = plan.text;
        self.slice.dg_ingest(self.task, &plan_text);

        let mut code_prompt =
            self.render(PromptStage::Code, &self.base_slots().with("design_solution", plan_text.as_str()))?;
        if let Some(style) = self.shared.ca2_preamble() {
            code_prompt = format!("{style}{code_prompt}");
        }
        let code = self.session.complete_seeded(
            &code_prompt,
            &label("code"),
            Some(Self::seat_seed(&seats, RoleKind::Coder)),
        )?;
        let candidate = Candidate {
            source: extract_code(&code.text),
            stage: CandidateStage::PlanGuidedCode,
            version: self.take_version(),
            parent_version: None,
            role_of_origin: Self::origin(RoleKind::Coder, super_as),
        };
        let ca1 = self.slice.ca1_store(&self.task.id, &candidate.source)?;
        let mut report = self.evaluate(&candidate.source);
        let ca3 = self.slice.ca3_append(
            &self.task.id,
            candidate.version,
            &candidate.source,
            report.traceback.as_deref(),
        )?;
        self.slice.set_score(ca3, score(report.pass_fraction, super_as, &weights))?;

        let mut current = candidate.clone();
        let mut post_debug_candidate = None;
        let mut debug_passes = 0;
        while !judge(&report).verdict.is_pass() && debug_passes < self.engine.config.group_debug_limit {
            let slots = self
                .base_slots()
                .with("implementation_solution", current.source.as_str())
                .with("result_traceback", failure_text(&report));
            let prompt = self.render(PromptStage::Debug, &slots)?;
            let fix = self.session.complete_seeded(
                &prompt,
                &label("debug"),
                Some(Self::seat_seed(&seats, RoleKind::Debugger)),
            )?;
            debug_passes += 1;
            let fixed = Candidate {
                source: extract_code(&fix.text),
                stage: CandidateStage::GroupDebugged,
                version: self.take_version(),
                parent_version: Some(current.version),
                role_of_origin: Self::origin(RoleKind::Debugger, super_as),
            };
            report = self.evaluate(&fixed.source);
            let id =
                self.slice.ca3_append(&self.task.id, fixed.version, &fixed.source, report.traceback.as_deref())?;
            self.slice.set_score(id, score(report.pass_fraction, super_as, &weights))?;
            current = fixed.clone();
            post_debug_candidate = Some(fixed);
        }

        let importance = report.pass_fraction;
        let final_score = score(importance, super_as, &weights);
        self.slice.set_score(ca1, final_score)?;
        Ok(GroupOutcome {
            group_index: index,
            super_role_as: super_as,
            seats,
            plan_text,
            candidate,
            post_debug_candidate,
            debug_passes,
            report,
            importance,
            final_score,
        })
    }

    /// Source of the best-scoring group result; ties go to the later group.
    fn best_group_source(&self) -> String {
        self.groups
            .iter()
            .max_by_key(|g| g.final_score)
            .map(|g| g.post_debug_candidate.as_ref().unwrap_or(&g.candidate).source.clone())
            .unwrap_or_default()
    }

    fn run_expert_phase(&mut self) -> Result<(), StepError> {
        let cfg = &self.engine.config;
        let digest = MemoryView::new(vec![self.shared, &self.slice])
            .build_digest(self.task, cfg.digest_budget_chars, cfg.digest_score_threshold)
            .render();
        let examples = self.best_group_source();
        for n in 1..=cfg.expert_attempts_t {
            let base = self.base_slots().with("experience_digest", digest.as_str());
            let (prompt, label, stage, parent) = match self.attempts.last() {
                None => (self.render(PromptStage::Expert, &base)?, "expert.initial", CandidateStage::ExpertInitial, None),
                Some(prev) => {
                    let slots = base
                        .with("first_solution", prev.candidate.source.as_str())
                        .with("result", failure_text(&prev.report))
                        .with("examples", examples.as_str());
                    (
                        self.render(PromptStage::Refine, &slots)?,
                        "expert.refine",
                        CandidateStage::ExpertRefined,
                        Some(prev.candidate.version),
                    )
                }
            };
            debug_assert!(n == 1 || parent.is_some());
            let reply = self.session.complete_seeded(&prompt, label, Some(self.super_seed))?;
            let candidate = Candidate {
                source: extract_code(&reply.text),
                stage,
                version: self.take_version(),
                parent_version: parent,
                role_of_origin: Origin::SuperRole,
            };
            let report = self.evaluate(&candidate.source);
            self.slice.ca3_append(&self.task.id, candidate.version, &candidate.source, report.traceback.as_deref())?;
            let passed = judge(&report).verdict.is_pass();
            if passed {
                self.slice.ca4_finalize(&self.task.id, &candidate.source)?;
            }
            self.attempts.push(ExpertAttempt { candidate, report });
            if passed {
                break;
            }
        }
        Ok(())
    }
}

/// Traceback of a failed run, or a short summary when there is none.
fn failure_text(report: &ExecutionReport) -> String {
    match &report.traceback {
        Some(tb) if !tb.trim().is_empty() => tb.trim_end().to_string(),
        _ => format!("{} of {} sample cases passed", report.passed_count(), report.per_case.len()),
    }
}
