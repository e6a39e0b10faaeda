use criterion::{black_box, criterion_group, criterion_main, Criterion};

use cogito_benches::{source, task};
use cogito_core::prompts::{format_test_cases, render, select, PromptStage, SlotMap};
use cogito_core::sandbox::{build_harness, extract_code};
use cogito_core::types::Family;

fn rendering(c: &mut Criterion) {
    let t = task(0);
    let slots = SlotMap::new()
        .with("question", t.description.clone())
        .with("test_case", format_test_cases(&t))
        .with("first_solution", source(30))
        .with("result", "Traceback (most recent call last):\nAssertionError")
        .with("examples", source(30))
        .with("experience_digest", "Experience from earlier attempts, best first:\n");
    let id = select(PromptStage::Refine, Family::Basic);
    c.bench_function("render/refine", |b| b.iter(|| render(id, black_box(&slots))));
}

fn harness(c: &mut Criterion) {
    let t = task(0);
    let completion = format!("Here you go:\n```python\n{}```\n", source(40));
    c.bench_function("extract_code", |b| b.iter(|| extract_code(black_box(&completion))));
    let code = extract_code(&completion);
    c.bench_function("build_harness", |b| {
        b.iter(|| build_harness(black_box(&code), &t.sample_io, Family::Basic, Some("f")))
    });
}

criterion_group!(benches, rendering, harness);
criterion_main!(benches);
