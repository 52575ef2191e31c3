use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};
use sizedcheck::driver::{collect_cases, run_cases_sequential, RunConfig};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn golden(c: &mut Criterion) {
    let root = corpus();
    let cases = collect_cases(&root).expect("corpus");
    let cfg = RunConfig::default();
    let mut group = c.benchmark_group("golden");
    group.bench_function("sequential", |b| {
        b.iter(|| run_cases_sequential(&root, &cases, &cfg).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| sizedcheck::driver::run_cases_parallel(&root, &cases, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, golden);
criterion_main!(benches);
