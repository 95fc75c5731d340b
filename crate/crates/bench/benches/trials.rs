use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use privsprt_bench::{bernoulli_private, gaussian_noiseless, BENCH_SEED};
use privsprt_core::rng::TrialStreams;
use privsprt_core::sequential_private::run_trial;
use privsprt_core::simulation::{run_experiment, with_threads};
use privsprt_core::sprt::TrialOptions;
use privsprt_core::Hypothesis;

fn single_trial(c: &mut Criterion) {
    let cfg = bernoulli_private(1);
    let mut i = 0;
    c.bench_function("privsprt_trial_bernoulli", |b| {
        b.iter_batched(
            || {
                i += 1;
                TrialStreams::new(BENCH_SEED, i)
            },
            |mut s| run_trial(&cfg.pair, &cfg.test, Hypothesis::H1, &mut s, TrialOptions::default()),
            BatchSize::SmallInput,
        )
    });
}

fn experiment_batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiment_4096_trials");
    group.sample_size(10);
    let private = bernoulli_private(4096);
    let wald = gaussian_noiseless(4096);
    for threads in [1, 4] {
        group.bench_function(format!("privsprt_bernoulli_{threads}t"), |b| {
            b.iter(|| with_threads(threads, || run_experiment(black_box(&private))).unwrap())
        });
        group.bench_function(format!("sprt_gaussian_{threads}t"), |b| {
            b.iter(|| with_threads(threads, || run_experiment(black_box(&wald))).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_trial, experiment_batches);
criterion_main!(benches);
