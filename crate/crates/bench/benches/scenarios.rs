use std::hint::black_box;

use coachsim_bench::oracle_run;
use criterion::{criterion_group, criterion_main, Criterion};

fn scenarios(c: &mut Criterion) {
    let mut group = c.benchmark_group("scenario");
    for id in ["stop-sign", "speed-change", "lane-change"] {
        group.bench_function(id, |b| b.iter(|| oracle_run(black_box(id), 20)));
    }
    group.finish();
}

criterion_group!(benches, scenarios);
criterion_main!(benches);
