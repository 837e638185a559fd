use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use evenodd_core::{
    build_spin_hamiltonian, even_odd_entropy_folded, geometric_alpha, ground_state_definite_parity, mode_contractions,
    subsystem_entropy, CouplingModel, Couplings, Lattice, LogBase, Selector, SpinModel,
};

fn chain(n: usize) -> evenodd_core::ModeContractions {
    let c = Couplings::first_neighbor(Lattice::chain(n).unwrap(), &[0.9], &[0.3]).unwrap();
    mode_contractions(&CouplingModel::new(c, 2.4).unwrap()).unwrap()
}

fn gaussian(c: &mut Criterion) {
    let mc = chain(36);
    c.bench_function("even comb folded n=36", |b| {
        b.iter(|| even_odd_entropy_folded(black_box(&mc), LogBase::Natural).unwrap())
    });
    c.bench_function("even comb generic n=36", |b| {
        b.iter(|| subsystem_entropy(black_box(&mc), &Selector::EvenComb, LogBase::Natural).unwrap())
    });
    let mc = chain(200);
    c.bench_function("block 100 of n=200", |b| {
        b.iter(|| subsystem_entropy(black_box(&mc), &Selector::chain_block(100), LogBase::Natural).unwrap())
    });
}

fn alpha(c: &mut Criterion) {
    c.bench_function("alpha d=2 at 1024", |b| b.iter(|| geometric_alpha(black_box(&[1.0, 1.0]), 1024).unwrap()));
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("spin ground state");
    group.sample_size(10);
    for n in [8, 12] {
        let m = SpinModel::first_neighbor(Lattice::chain(n).unwrap(), 1, 0.5, &[1.0], &[0.5]).unwrap();
        let h = build_spin_hamiltonian(&m, 1 << 20).unwrap();
        group.bench_function(format!("n={n}"), |b| b.iter(|| ground_state_definite_parity(black_box(&h)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, gaussian, alpha, exact);
criterion_main!(benches);
