use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cogito_benches::{populated_store, source, task};
use cogito_core::fraction::Fraction;
use cogito_core::memory::{compress_source, similarity};

fn retrieval(c: &mut Criterion) {
    let mut group = c.benchmark_group("retrieve_similar");
    for tasks in [10, 100, 1000] {
        let store = populated_store(tasks);
        let query = task(tasks + 1).description;
        group.bench_with_input(BenchmarkId::from_parameter(tasks), &store, |b, store| {
            b.iter(|| store.retrieve_similar(black_box(&query), 5).len())
        });
    }
    group.finish();
}

fn digest(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_digest");
    for tasks in [10, 100] {
        let store = populated_store(tasks);
        let t = task(3);
        group.bench_with_input(BenchmarkId::from_parameter(tasks), &store, |b, store| {
            b.iter(|| store.view().build_digest(black_box(&t), 4000, Fraction::new(3, 20)).total_chars())
        });
    }
    group.finish();
}

fn text(c: &mut Criterion) {
    let long = source(200);
    c.bench_function("compress_source/200_lines", |b| b.iter(|| compress_source(black_box(&long))));
    let (a, z) = (task(1).description, task(2).description);
    c.bench_function("similarity", |b| b.iter(|| similarity(black_box(&a), black_box(&z))));
}

criterion_group!(benches, retrieval, digest, text);
criterion_main!(benches);
