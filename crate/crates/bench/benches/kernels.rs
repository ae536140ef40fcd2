use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use scorenet::distributed::{init_agents, push_sum_round};
use scorenet::estimators::{fr_gradient, fr_objective, nr_gradient, nr_objective};
use scorenet::graph::{make_comm_schedule, ScheduleFamily};
use scorenet::soft_classify;
use scorenet_bench::reliability_instance;

const SIZES: [usize; 3] = [50, 300, 1000];

fn objectives(c: &mut Criterion) {
    let mut group = c.benchmark_group("objectives");
    for n in SIZES {
        let (model, params, counts) = reliability_instance(n, 1);
        let phi = counts.phi();
        group.bench_with_input(BenchmarkId::new("nr_objective", n), &counts, |b, counts| {
            b.iter(|| nr_objective(black_box(counts), &model, &params).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("nr_gradient", n), &counts, |b, counts| {
            b.iter(|| nr_gradient(black_box(counts), &model, &params).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fr_objective", n), &phi, |b, phi| {
            b.iter(|| fr_objective(black_box(phi), &model, &params).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fr_gradient", n), &phi, |b, phi| {
            b.iter(|| fr_gradient(black_box(phi), &model, &params).unwrap())
        });
    }
    group.finish();
}

fn classifier(c: &mut Criterion) {
    let mut group = c.benchmark_group("soft_classify");
    for n in SIZES {
        let (model, params, counts) = reliability_instance(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &counts, |b, counts| {
            b.iter(|| soft_classify(black_box(counts), &model, &params).unwrap())
        });
    }
    group.finish();
}

fn push_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("push_sum_round");
    for n in SIZES {
        let (_, _, counts) = reliability_instance(n, 3);
        let schedule = make_comm_schedule(n, ScheduleFamily::StaticComplete, 1, 3).unwrap();
        let agents = init_agents(&counts, vec![vec![0.5]; n]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &agents, |b, agents| {
            b.iter_batched_ref(
                || agents.clone(),
                |a| push_sum_round(a, schedule.frame(0)).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, objectives, classifier, push_sum);
criterion_main!(benches);
