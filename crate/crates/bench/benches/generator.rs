use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vibrecoil_bench::fixtures;
use vibrecoil_core::dynamics::Integrator;
use vibrecoil_core::liouvillian::GeneratorSet;
use vibrecoil_core::{initial_state, Basis, Excitation, GreensData};

fn generator_benches(c: &mut Criterion) {
    let mut apply = c.benchmark_group("apply");
    let mut systems = Vec::new();
    for (name, cfg) in fixtures() {
        let basis = Basis::from_config(&cfg).unwrap();
        let greens = GreensData::new(&cfg.positions, &cfg.dipole, &cfg.oscillation).unwrap();
        let g = GeneratorSet::assemble(&cfg, &basis, &greens).unwrap();
        let rho = initial_state(&basis, &Excitation::Uniform, None, None).unwrap().matrix().clone();
        systems.push((name, basis.dim(), g, rho));
    }
    for (name, dim, g, rho) in &systems {
        let (mut scratch, mut out) = (rho.clone(), rho.clone());
        apply.bench_with_input(BenchmarkId::new(*name, dim), rho, |b, rho| {
            b.iter(|| g.apply_hermitian_into(rho.view(), &mut scratch, &mut out).unwrap())
        });
    }
    apply.finish();

    let mut step = c.benchmark_group("rk4_step");
    step.sample_size(20);
    for (name, dim, g, rho) in &systems {
        let mut it = Integrator::new(g, 1e-3).unwrap();
        let mut state = rho.clone();
        step.bench_function(BenchmarkId::new(*name, dim), |b| b.iter(|| it.step(&mut state).unwrap()));
    }
    step.finish();
}

criterion_group!(benches, generator_benches);
criterion_main!(benches);
