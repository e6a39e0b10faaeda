use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use anyhow::{anyhow, Context};
use cogito_core::bench::{write_task_result, write_task_results};
use cogito_core::memory::MemoryRecord;
use cogito_core::{aggregate, load_dataset, report, run_tasks, BackendKind, Engine, MemoryStore, TaskResult};
use tracing::warn;

use crate::config::BackendArg;
use crate::{DatasetArgs, InspectArgs, SolveArgs};

const CONFIG_ERROR: u8 = 2;
const RUN_ERROR: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub source: anyhow::Error,
}

trait ExitWith<T> {
    fn config_err(self) -> Result<T, Failure>;
    fn run_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn config_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: CONFIG_ERROR, source: e.into() })
    }

    fn run_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: RUN_ERROR, source: e.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Replay,
}

struct Prepared {
    engine: Engine,
    tasks: Vec<cogito_core::Task>,
    memory: MemoryStore,
    store: PathBuf,
}

fn prepare(data: &DatasetArgs, mode: Mode) -> Result<Prepared, Failure> {
    let mut config = data.engine.resolve().config_err()?;
    if mode == Mode::Replay {
        if data.engine.backend == Some(BackendArg::Live) {
            return Err(anyhow!("replay always uses the scripted backend")).config_err();
        }
        config.backend.kind = BackendKind::Scripted;
        if config.backend.script_path.is_none() {
            return Err(anyhow!("replay requires --script")).config_err();
        }
    }
    let dataset = load_dataset(&data.dataset, data.family, data.lenient).config_err()?;
    for s in &dataset.skipped {
        warn!(line = s.line, "skipped dataset line: {}", s.message);
    }
    if dataset.tasks.is_empty() {
        return Err(anyhow!("dataset {} has no tasks", data.dataset.display())).config_err();
    }
    let engine = Engine::from_config(config).config_err()?;

    let store = data.store.clone().unwrap_or_else(|| data.out.join("memory"));
    let mut memory = match &data.store {
        Some(dir) => MemoryStore::load(dir).config_err()?,
        None => MemoryStore::new(),
    };
    if let Some(path) = &data.user_code {
        let src = fs::read_to_string(path)
            .with_context(|| format!("cannot read user code {}", path.display()))
            .config_err()?;
        if memory.ca2_load_user_code(&src) == 0 {
            warn!(path = %path.display(), "no style hints found in user code");
        }
    }
    Ok(Prepared { engine, tasks: dataset.tasks, memory, store })
}

/// Exit status once outputs are written: script divergence always fails,
/// other task failures only under `--strict`.
fn task_status(results: &[TaskResult], strict: bool) -> ExitCode {
    let mut exhausted = false;
    let mut failed = false;
    for r in results {
        if let Some(e) = &r.error {
            eprintln!("task {} sample {}: {}: {}", r.task_id, r.sample_index, e.kind, e.message);
            exhausted |= e.kind == "script_exhausted";
        }
        failed |= !r.final_verdict.is_pass();
    }
    if exhausted || (strict && failed) {
        ExitCode::from(RUN_ERROR)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn run(data: DatasetArgs, ks: &[u32], jobs: Option<usize>, mode: Mode) -> Result<ExitCode, Failure> {
    let Prepared { engine, tasks, mut memory, store } = prepare(&data, mode)?;
    let samples = engine.config().samples_per_task;
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > samples) {
        return Err(anyhow!("--k {k} must be between 1 and the sample count {samples}")).config_err();
    }
    if jobs == Some(0) {
        return Err(anyhow!("--jobs must be at least 1")).config_err();
    }
    let jobs = jobs.unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()));

    let results = run_tasks(&engine, &tasks, jobs, &mut memory);
    write_task_results(&data.out, &results, samples).run_err()?;
    let metrics = aggregate(&results, ks).run_err()?;
    let line = report(&metrics, &data.out).run_err()?;
    memory.persist(&store).run_err()?;
    println!("{line}");
    Ok(task_status(&results, data.strict))
}

pub fn solve(args: SolveArgs) -> Result<ExitCode, Failure> {
    let Prepared { engine, tasks, mut memory, store } = prepare(&args.data, Mode::Run)?;
    let Some(task) = tasks.iter().find(|t| t.id == args.task_id) else {
        return Err(anyhow!("no task `{}` in {}", args.task_id, args.data.dataset.display())).config_err();
    };
    let samples = engine.config().samples_per_task;
    let results = run_tasks(&engine, std::slice::from_ref(task), 1, &mut memory);
    for r in &results {
        let path = write_task_result(&args.data.out, r, samples).run_err()?;
        println!("{}", path.display());
    }
    memory.persist(&store).run_err()?;
    Ok(task_status(&results, args.data.strict))
}

fn chain_line(r: &MemoryRecord) -> String {
    let outcome = match &r.traceback {
        Some(tb) => tb.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("failed").trim().to_string(),
        None => "ok".to_string(),
    };
    let score = r.score.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
    format!("  v{} #{} score {} {}", r.version.unwrap_or(0), r.id(), score, outcome)
}

pub fn inspect(args: InspectArgs) -> Result<ExitCode, Failure> {
    let memory = MemoryStore::load(&args.store).config_err()?;
    for (region, count) in memory.region_counts() {
        println!("{region} {count}");
    }
    if let Some(task) = &args.task_id {
        let chain = memory.ca3_chain(task);
        println!("ca3 chain for {task}: {} version(s)", chain.len());
        for r in chain {
            println!("{}", chain_line(r));
        }
        match memory.ca4(task) {
            Some(r) => println!("ca4 #{} ({} chars)", r.id(), r.payload.chars().count()),
            None => println!("ca4 none"),
        }
    }
    let problems = memory.check_invariants();
    for p in &problems {
        eprintln!("invariant: {p}");
    }
    Ok(ExitCode::SUCCESS)
}
