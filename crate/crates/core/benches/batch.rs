//! Sequential against rayon-parallel execution of a batch of independent
//! master-equation right-hand-side evaluations.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gkp_core::exec::{map_items_with, Execution};
use gkp_core::lindblad::{lindblad_rhs, LindbladModel};
use gkp_core::random::{random_density_matrix, rng_for, GinibreSpec};
use gkp_core::{GkpCode, GkpParameters};

fn batch(c: &mut Criterion) {
    let code = GkpCode::build(GkpParameters::square(0.14).unwrap()).unwrap();
    let model = LindbladModel::gkp(&code).unwrap();
    let spec = GinibreSpec::truncation_safe(code.dim());
    let states: Vec<_> = (0..8)
        .map(|k| random_density_matrix(&spec, &mut rng_for(1, k)).unwrap())
        .collect();

    let mut group = c.benchmark_group("batch");
    group.sample_size(10);
    for (label, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::new(label, states.len()), &mode, |b, &mode| {
            b.iter(|| map_items_with(mode, &states, |rho| lindblad_rhs(&model, rho.matrix()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
