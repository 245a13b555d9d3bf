use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sqvar_bench::quadratic_instance;
use sqvar_core::solve::{solve_dss, SolveOptions};

fn trust_region(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("solve_dss");
    group.sample_size(20);
    for d in [3usize, 5, 8] {
        let (p, f0) = quadratic_instance(d, 2);
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| solve_dss(&p, &f0, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trust_region);
criterion_main!(benches);
