use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use privsprt_bench::accounting_test;
use privsprt_core::accounting::{best_dp_report_with, estimate_ta_tb, privsprt_rdp_curve, DEFAULT_C};
use privsprt_core::{error_rate_bound, rdp_to_dp, sample_size_bound, RdpCurve, TruncationSpec};

fn conversion(c: &mut Criterion) {
    let curve = RdpCurve::gaussian(1.0, 4.0).unwrap();
    c.bench_function("rdp_to_dp_gaussian", |b| b.iter(|| rdp_to_dp(black_box(&curve), 1e-5)));
}

fn stopping_moments(c: &mut Criterion) {
    let (pair, test) = accounting_test();
    let mut group = c.benchmark_group("accounting");
    group.sample_size(10);
    group.bench_function("estimate_ta_tb_5000", |b| {
        b.iter(|| {
            estimate_ta_tb(&pair, test.thresholds, test.trunc, test.sigma1, test.sigma2, 2.0, DEFAULT_C, 5000).unwrap()
        })
    });
    let (t_a, t_b) =
        estimate_ta_tb(&pair, test.thresholds, test.trunc, test.sigma1, test.sigma2, 2.0, DEFAULT_C, 5000).unwrap();
    group.bench_function("privsprt_curve_to_dp", |b| {
        b.iter(|| {
            let curve = privsprt_rdp_curve(test.trunc, test.sigma1, test.sigma2, 2.0, &t_a, &t_b).unwrap();
            rdp_to_dp(&curve, 1e-5).unwrap()
        })
    });
    group.bench_function("best_dp_report_2000", |b| {
        b.iter(|| best_dp_report_with(&pair, &test, 1e-5, 2000).unwrap())
    });
    group.finish();
}

fn bound_grids(c: &mut Criterion) {
    let trunc = TruncationSpec::new(0.5).unwrap();
    c.bench_function("sample_size_bound_grid", |b| {
        b.iter(|| sample_size_bound(black_box(43.0), 0.3, trunc, 9.7, 19.4).unwrap())
    });
    c.bench_function("error_rate_bound_grid", |b| {
        b.iter(|| error_rate_bound(black_box(43.0), 0.2, trunc, 9.7, 19.4).unwrap())
    });
}

criterion_group!(benches, conversion, stopping_moments, bound_grids);
criterion_main!(benches);
