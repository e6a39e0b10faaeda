//! Runs many task samples on a bounded worker pool.
//!
//! Tasks are processed in batches of `jobs`. Every sample in a batch works on
//! its own slice forked from the store as it stood when the batch started;
//! slices are merged back in task order once the batch finishes. Output is
//! therefore a function of the inputs and `jobs`, independent of scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use tracing::info;

use crate::memory::MemoryStore;
use crate::pipeline::{Engine, TaskOutcome, TaskResult};
use crate::types::Task;

/// Solves `samples_per_task` samples of every task, folding memory into `memory`.
/// Results come back in task order, samples ascending.
pub fn run_tasks(engine: &Engine, tasks: &[Task], jobs: usize, memory: &mut MemoryStore) -> Vec<TaskResult> {
    let jobs = jobs.max(1);
    let samples = engine.config().samples_per_task.max(1);
    let mut results = Vec::with_capacity(tasks.len() * samples as usize);

    for batch in tasks.chunks(jobs) {
        let units: Vec<(&Task, u32)> = batch.iter().flat_map(|t| (0..samples).map(move |s| (t, s))).collect();
        let slots: Vec<Mutex<Option<TaskOutcome>>> = units.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let snapshot: &MemoryStore = memory;
        thread::scope(|scope| {
            for _ in 0..jobs.min(units.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some((task, sample)) = units.get(i) else { break };
                    let outcome = engine.solve_task(task, *sample, snapshot);
                    info!(
                        task = %task.id,
                        sample,
                        verdict = %outcome.result.final_verdict,
                        api_calls = outcome.result.ledger.api_calls,
                        "task finished"
                    );
                    *slots[i].lock().expect("result slot") = Some(outcome);
                });
            }
        });
        for slot in slots {
            let outcome = slot.into_inner().expect("result slot").expect("every unit ran");
            memory.merge(outcome.memory);
            results.push(outcome.result);
        }
    }
    results
}
