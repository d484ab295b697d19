use criterion::{black_box, criterion_group, criterion_main, Criterion};

use fluency_bench::{adaptive_fixture, score_matrix, word_pairs};
use fluency_core::adaptive::{run_ca, sweep_window_sizes, SelectionMetric};
use fluency_core::cleaning::levenshtein;
use fluency_core::metrics::aggregate;
use fluency_core::AdaptiveConfig;

fn bench_levenshtein(c: &mut Criterion) {
    let pairs = word_pairs(1000);
    c.bench_function("levenshtein/1000 pairs", |b| {
        b.iter(|| {
            pairs
                .iter()
                .map(|(x, y)| levenshtein(black_box(x), black_box(y)))
                .sum::<usize>()
        })
    });
}

fn bench_aggregate(c: &mut Criterion) {
    // Registry size of the full grid against a large list sample.
    let matrix = score_matrix(56, 796);
    c.bench_function("aggregate/56x796", |b| {
        b.iter(|| aggregate(black_box(&matrix)).unwrap())
    });
}

fn bench_ca(c: &mut Criterion) {
    let (registry, lists) = adaptive_fixture(56, 50, 30);
    let cfg = AdaptiveConfig::new(5, 5);
    c.bench_function("ca/56 functions, 50 lists of 30, x=5", |b| {
        b.iter(|| {
            for list in &lists {
                black_box(run_ca(&registry, list, &cfg).unwrap());
            }
        })
    });
    let windows: Vec<usize> = (1..=20).collect();
    c.bench_function("sweep/56 functions, 50 lists, x=1..20", |b| {
        b.iter(|| sweep_window_sizes(&registry, &lists, &windows, SelectionMetric::TopK(5), 5).unwrap())
    });
}

criterion_group!(benches, bench_levenshtein, bench_aggregate, bench_ca);
criterion_main!(benches);
