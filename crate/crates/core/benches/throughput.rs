use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use collider_lab::exec::Execution;
use collider_lab::mc::simulate;
use collider_lab::scm::Coefficient;
use collider_lab::sweep::{preset_fig3, run_sweep_with};
use collider_lab::{ScmModel, ScmParams};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let model = ScmModel::new(&collider_lab::sweep::fig3_base()).unwrap();
    let n = 1_000_000u64;
    let mut group = c.benchmark_group("mc_simulate");
    group.throughput(Throughput::Elements(n));
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
            b.iter(|| black_box(simulate(&model, n, 42, exec)));
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let spec = preset_fig3(Coefficient::BetaAUM).unwrap();
    let mut group = c.benchmark_group("fig3_sweep");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| black_box(run_sweep_with(&spec, exec).unwrap()))
        });
    }
    group.finish();
}

fn exact_report(c: &mut Criterion) {
    let params = ScmParams {
        alpha_a: 1.5,
        beta_m: 1.0,
        ..ScmParams::default()
    };
    c.bench_function("exact_report", |b| {
        b.iter(|| {
            let model = ScmModel::new(black_box(&params)).unwrap();
            black_box(collider_lab::report(&model).unwrap())
        })
    });
}

criterion_group!(benches, monte_carlo, sweeps, exact_report);
criterion_main!(benches);
