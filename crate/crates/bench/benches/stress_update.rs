use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mwplast::{integrate_step, run_program, InternalState, Material, MaterialParams, Scenario, SymTensor, Tolerances};

fn single_steps(c: &mut Criterion) {
    let reference = Material::new(MaterialParams::REFERENCE).unwrap();
    let softening = Material::new(MaterialParams {
        k1d: 1e-4,
        ..MaterialParams::REFERENCE
    })
    .unwrap();
    let virgin = InternalState::default();
    let softened = InternalState {
        eps_p: SymTensor::hydrostatic(2e-4 / 3.0),
        kappa: 2e-4,
    };
    let cases = [
        ("elastic", reference, virgin, SymTensor::diag(1e-5, -2e-5, 3e-6)),
        ("smooth", reference, virgin, SymTensor::diag(1e-4, 0.0, 0.0)),
        ("apex", reference, virgin, SymTensor::hydrostatic(3e-4)),
        (
            "apex_softening",
            softening,
            softened,
            softened.eps_p + SymTensor::hydrostatic(1.3e-4),
        ),
    ];
    let mut group = c.benchmark_group("integrate_step");
    for (name, material, state, eps) in cases {
        let tol = Tolerances::for_params(&material.params);
        group.bench_function(name, |b| {
            b.iter(|| integrate_step(black_box(&eps), black_box(&state), &material, &tol).unwrap())
        });
    }
    group.finish();
}

fn scenarios(c: &mut Criterion) {
    let mut group = c.benchmark_group("scenario");
    for s in Scenario::ALL {
        let material = Material::new(s.params()).unwrap();
        let tol = Tolerances::for_params(&material.params);
        let program = s.program(200);
        group.bench_with_input(BenchmarkId::from_parameter(s), &program, |b, p| {
            b.iter(|| run_program(black_box(p), &material, &tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_steps, scenarios);
criterion_main!(benches);
