use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudohyp_core::catalog::{attractor_experiment, build_example, ExampleName, ExampleParams};
use pseudohyp_core::checker::{check_splitting, CheckerConfig};
use pseudohyp_core::geometry::FlatPseudoSpace;
use pseudohyp_core::splitting::{d_subspace, DistanceOptions, Subspace};
use pseudohyp_core::transport::curve_line;
use pseudohyp_core::{Execution, Manifold, MetricSignature, Point, Vector};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn checker(c: &mut Criterion) {
    let bundle = build_example(ExampleName::Ex3_2, &ExampleParams { depth: 4, ..Default::default() }).unwrap();
    let field = bundle.candidate_field().unwrap();
    let mut group = c.benchmark_group("check_horseshoe");
    group.sample_size(10);
    for (label, exec) in MODES {
        let cfg = CheckerConfig { execution: exec, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| check_splitting(&bundle.system, &bundle.invariant_set, field, &cfg).unwrap())
        });
    }
    group.finish();
}

fn distance(c: &mut Criterion) {
    let sig = MetricSignature::new(vec![1, 1, 1, -1]).unwrap();
    let m = Manifold::flat(sig.clone());
    let o = Point::new(vec![0.0; 4]);
    let curve = curve_line(&FlatPseudoSpace::new(sig), &o, &o).unwrap();
    let e = |i: usize| Vector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 });
    let first = Subspace::new(&m, o.clone(), vec![e(0), e(1), e(2)]).unwrap();
    let second = Subspace::new(&m, o.clone(), vec![e(0) + e(3) * 0.3, e(1), e(2) + e(0) * 0.2]).unwrap();
    let mut group = c.benchmark_group("d_subspace_k3");
    group.sample_size(10);
    for (label, exec) in MODES {
        let opts = DistanceOptions { grid: 24, execution: exec, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| d_subspace(&m, &curve, &first, 0.0, &second, 0.0, &opts).unwrap())
        });
    }
    group.finish();
}

fn attractor(c: &mut Criterion) {
    let mut group = c.benchmark_group("attractor_multistart");
    group.sample_size(10);
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| attractor_experiment(ExampleName::Ex3_3, 64, 200, 10, 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, checker, distance, attractor);
criterion_main!(benches);
