//! Reverse-order multi-agent code generation.
//!
//! A task passes through three groups in which one persistent Super-Role
//! takes the Debugger, Coder and Planner seat in turn while two fresh peers
//! fill the others. Each group plans, codes, tests in a sandbox and debugs at
//! most once. The Super-Role then solves the task alone with a digest of its
//! scored experience and a bounded number of refinement attempts.

pub mod backend;
pub mod bench;
pub mod fraction;
pub mod memory;
pub mod pipeline;
pub mod prompts;
pub mod runner;
pub mod sandbox;
pub mod types;

pub use backend::{BackendConfig, BackendError, BackendKind, ChatBackend, UsageLedger};
pub use bench::{aggregate, load_dataset, pass_at_k, report, BenchError, RunMetrics};
pub use fraction::Fraction;
pub use memory::{MemoryStore, Region};
pub use pipeline::{Engine, EngineError, GroupOutcome, TaskResult};
pub use runner::run_tasks;
pub use types::{
    Candidate, EngineConfig, ExecutionReport, Family, RoleKind, RoleWeights, Task, TestCase, TestMode, Verdict,
};
