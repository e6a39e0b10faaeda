use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cogito_core::pass_at_k;

fn pass_at_k_sizes(c: &mut Criterion) {
    let mut group = c.benchmark_group("pass_at_k");
    for n in [10u64, 200, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| pass_at_k(black_box(n), black_box(n / 3), black_box(n / 10 + 1)))
        });
    }
    group.finish();
}

criterion_group!(benches, pass_at_k_sizes);
criterion_main!(benches);
