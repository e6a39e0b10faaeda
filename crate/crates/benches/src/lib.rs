//! Inputs shared by the benchmarks.

use cogito_core::memory::MemoryStore;
use cogito_core::types::{Family, Task, TestCase, TestMode};

const WORDS: [&str; 12] = [
    "reverse", "string", "sum", "list", "sort", "numbers", "count", "vowels", "matrix", "prime", "digits", "words",
];

/// A task whose description draws four words from a fixed vocabulary.
pub fn task(i: usize) -> Task {
    let description = (0..4).map(|j| WORDS[(i * 7 + j * 5) % WORDS.len()]).collect::<Vec<_>>().join(" ");
    Task {
        id: format!("task{i}"),
        description,
        sample_io: vec![TestCase::new(format!("assert f({i}) == {i}"), "", TestMode::AssertExpr)],
        entry_point: Some("f".into()),
        family: Family::Basic,
        difficulty: None,
    }
}

/// A store holding `tasks` solved tasks, each with a plan, a first answer,
/// three versions and a final answer.
pub fn populated_store(tasks: usize) -> MemoryStore {
    let mut m = MemoryStore::new();
    for i in 0..tasks {
        let t = task(i);
        m.dg_ingest(&t, "1. read the input\n2. compute");
        m.ca1_store(&t.id, &source(20)).expect("dg present");
        for v in 1..=3 {
            m.ca3_append(&t.id, v, &source(20), (v < 3).then_some("Traceback\nAssertionError")).expect("dg present");
        }
        m.ca4_finalize(&t.id, &source(20)).expect("dg present");
    }
    m
}

/// A Python function of `lines` body lines with comments and blank lines mixed in.
pub fn source(lines: usize) -> String {
    let mut s = String::from("def f(x):\n    \"\"\"Docstring.\"\"\"\n");
    for i in 0..lines {
        match i % 4 {
            0 => s.push_str("    # step comment\n"),
            1 => s.push('\n'),
            _ => s.push_str(&format!("    x  =  x  +  {i}   # inline\n")),
        }
    }
    s.push_str("    return x\n");
    s
}
