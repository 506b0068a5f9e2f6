use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use soil_bench::scenario_data;
use soil_core::path::{default_lambda_grid, penalized_path, PenaltySpec};
use soil_core::pipeline::path_candidates;
use soil_core::weighting::{arm_weights, bic_p_weights, ArmConfig, BicPConfig};
use soil_core::{compute_importance, PenaltyKind, SoilConfig, WeightingMethod};

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("penalized_path");
    for n in [200, 1000] {
        let data = scenario_data("s1", n);
        let grid = default_lambda_grid(&data, 100).unwrap();
        for kind in PenaltyKind::ALL {
            let spec = PenaltySpec::new(kind, grid.clone()).unwrap();
            group.bench_with_input(BenchmarkId::new(kind.to_string(), n), &spec, |b, spec| {
                b.iter(|| penalized_path(&data, spec).unwrap())
            });
        }
    }
    group.finish();
}

fn weights(c: &mut Criterion) {
    let data = scenario_data("s1", 200);
    let cands = path_candidates(&data, &SoilConfig::default()).unwrap();
    let mut group = c.benchmark_group("weights");
    group.sample_size(10);
    for splits in [10, 100] {
        let cfg = ArmConfig {
            n_splits: splits,
            ..ArmConfig::default()
        };
        group.bench_with_input(BenchmarkId::new("arm", splits), &cfg, |b, cfg| {
            b.iter(|| arm_weights(&data, &cands, cfg).unwrap())
        });
    }
    group.bench_function("bic-p", |b| b.iter(|| bic_p_weights(&data, &cands, &BicPConfig::default()).unwrap()));
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let mut group = c.benchmark_group("compute_importance");
    group.sample_size(10);
    for (example, n) in [("s1", 200), ("3", 200), ("ss2", 400)] {
        let data = scenario_data(example, n);
        let cfg = SoilConfig {
            methods: vec![WeightingMethod::Arm, WeightingMethod::BicP],
            ..SoilConfig::default()
        };
        group.bench_function(example, |b| b.iter(|| compute_importance(&data, &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, paths, weights, end_to_end);
criterion_main!(benches);
