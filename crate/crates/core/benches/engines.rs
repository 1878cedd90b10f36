use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use subsys::circuit::{run_circuit_trials, CircuitEngine, DepolarizingModel};
use subsys::classical::ClassicalCode;
use subsys::codes::{build_bbs, build_shp, reference};
use subsys::exec::Execution;
use subsys::pheno::{run_trials, PhenoModel};

fn engines(c: &mut Criterion) {
    let h = ClassicalCode::hamming_7_4();
    let codes = [
        ("bbs21", build_bbs(&h, &h, &reference::hamming_bbs_q()).unwrap()),
        ("shp49", build_shp(h.parity_check(), h.parity_check()).unwrap()),
    ];
    let modes = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

    let mut group = c.benchmark_group("pheno_2000_trials");
    group.sample_size(10);
    let model = PhenoModel::uniform(1e-2).unwrap();
    for (name, code) in &codes {
        for (mode, exec) in modes {
            group.bench_with_input(BenchmarkId::new(*name, mode), &exec, |b, &exec| {
                b.iter(|| black_box(run_trials(code, model, 2000, 1, exec).unwrap()))
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("circuit_20000_trials");
    group.sample_size(10);
    let model = DepolarizingModel::new(1e-3).unwrap();
    for (name, code) in &codes {
        let engine = CircuitEngine::new(code);
        for (mode, exec) in modes {
            group.bench_with_input(BenchmarkId::new(*name, mode), &exec, |b, &exec| {
                b.iter(|| black_box(run_circuit_trials(&engine, model, 20_000, 1, exec)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, engines);
criterion_main!(benches);
