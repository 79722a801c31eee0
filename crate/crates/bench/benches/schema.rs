use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use genus_iso_bench::words;

fn bench_normalize(c: &mut Criterion) {
    let mut group = c.benchmark_group("normalize");
    for labels in [4, 8, 16] {
        let batch = words(32, labels, 3);
        group.bench_with_input(BenchmarkId::from_parameter(labels), &batch, |b, batch| {
            b.iter(|| batch.iter().map(|w| w.normalize().1.len()).sum::<usize>())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_normalize);
criterion_main!(benches);
