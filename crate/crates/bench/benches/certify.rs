use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sqvar_bench::quadratic_instance;
use sqvar_core::certify::{certify_dss, Order};
use sqvar_core::problems::make_example_2_1;
use sqvar_core::Tolerances;

fn second_order(c: &mut Criterion) {
    let tols = Tolerances::default();
    let mut group = c.benchmark_group("certify_dss_second_order");
    for d in [4usize, 8, 12] {
        let (p, f) = quadratic_instance(d, 1);
        group.bench_with_input(BenchmarkId::new("quadratic", d), &d, |b, _| {
            b.iter(|| certify_dss(&p, &f, Order::Second, &tols).unwrap())
        });
        let ex = make_example_2_1(d, d - 1).unwrap();
        group.bench_with_input(BenchmarkId::new("spurious_width", d), &d, |b, _| {
            b.iter(|| certify_dss(&ex.problem, &ex.f_k, Order::Second, &tols).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, second_order);
criterion_main!(benches);
