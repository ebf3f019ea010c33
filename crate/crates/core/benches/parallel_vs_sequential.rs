use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pv_vacuum::field::{FourPotential, Grid3};
use pv_vacuum::kernel::KernelTable;
use pv_vacuum::lattice::vacuum_state;
use pv_vacuum::{derive_scheme, Execution, MassSpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn vacuum(c: &mut Criterion) {
    let s = derive_scheme(MassSpectrum::new(1.0, 2.0, 3.0).unwrap()).unwrap();
    let g = Grid3::new(6, 5.0).unwrap();
    let p = FourPotential::random(g, &mut ChaCha8Rng::seed_from_u64(1), 1, 0.3, 0.3);
    let mut group = c.benchmark_group("vacuum_state_n6");
    group.sample_size(10);
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            Execution::set_global(mode);
            b.iter(|| vacuum_state(&s, g, &p, 1.0).unwrap().energy)
        });
    }
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let s = derive_scheme(MassSpectrum::new(1.0, 2.0, 3.0).unwrap()).unwrap();
    let mut group = c.benchmark_group("kernel_table_256");
    for (name, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            Execution::set_global(mode);
            b.iter(|| KernelTable::tabulate(&s, 10.0, 256).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, vacuum, kernel);
criterion_main!(benches);
