use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use extint_core::normseq::d_n1;
use extint_core::pair_count;
use extint_core::simulate::field::equicorr_pair_field_with;
use extint_core::simulate::{count_field_exceedances, field_max, rep_rng};

fn dense_field(c: &mut Criterion) {
    let mut g = c.benchmark_group("pair_field");
    for p in [300usize, 1000] {
        g.bench_with_input(BenchmarkId::new("materialized", p), &p, |b, &p| {
            let mut rng = rep_rng(1, 0);
            b.iter(|| equicorr_pair_field_with(p, 0.3, &mut rng).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("streamed_max", p), &p, |b, &p| {
            let mut rng = rep_rng(1, 0);
            b.iter(|| field_max(p, 0.3, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn sparse_counts(c: &mut Criterion) {
    let mut g = c.benchmark_group("exceedance_count");
    for p in [1000usize, 10_000] {
        let u = d_n1(pair_count(p)).unwrap();
        for rho in [0.2, 0.45] {
            g.bench_with_input(BenchmarkId::new(format!("rho{rho}"), p), &p, |b, &p| {
                let mut rng = rep_rng(2, 0);
                b.iter(|| count_field_exceedances(p, rho, u, &mut rng).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, dense_field, sparse_counts);
criterion_main!(benches);
