use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sqvar_bench::gaussian_matrix;
use sqvar_core::nucnorm::{nuclear_norm_block, project_nnm};

fn block_and_back(c: &mut Criterion) {
    let mut group = c.benchmark_group("nuclear_norm_block");
    for (d1, d2) in [(8usize, 6usize), (20, 15), (40, 30)] {
        let x = gaussian_matrix(d1, d2, 3);
        let label = format!("{d1}x{d2}");
        group.bench_with_input(BenchmarkId::new("lift", &label), &x, |b, x| {
            b.iter(|| nuclear_norm_block(x).unwrap())
        });
        let xbar = nuclear_norm_block(&x).unwrap().xbar;
        group.bench_with_input(BenchmarkId::new("project", &label), &xbar, |b, xbar| {
            b.iter(|| project_nnm(xbar, d1, 1e-9).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, block_and_back);
criterion_main!(benches);
