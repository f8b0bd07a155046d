use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use epsplit_core::jordan::{build_chain, ChainOptions};
use epsplit_core::linalg::{eigenvalues, svd, ComplexMatrix, Quad, C64};
use epsplit_core::models::{susy_hamiltonian, susy_perturbations, SusyParams};
use epsplit_core::sweep::{fig1_compute, run_sweep, SweepConfig};

fn susy(n: usize) -> ComplexMatrix {
    susy_hamiltonian(&SusyParams::at_ep(n, 0.0, 1.0))
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigenvalues");
    for n in [4, 8, 16] {
        let h = susy(n).shift_diagonal(C64::new(0.01, 0.0));
        g.bench_with_input(BenchmarkId::new("f64", n), &h, |b, h| b.iter(|| eigenvalues(black_box(h)).unwrap()));
        let wide: ComplexMatrix<Quad> = h.convert();
        g.bench_with_input(BenchmarkId::new("quad", n), &wide, |b, h| b.iter(|| eigenvalues(black_box(h)).unwrap()));
    }
    g.finish();
}

fn decompositions(c: &mut Criterion) {
    let h = susy(8);
    c.bench_function("svd/8", |b| b.iter(|| svd(black_box(&h)).unwrap()));
    c.bench_function("build_chain/susy8", |b| {
        b.iter(|| build_chain(black_box(&h), C64::new(0.0, 0.0), 8, ChainOptions::default()).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let h: ComplexMatrix<Quad> = susy_hamiltonian(&SusyParams::at_ep(4, 0.0, 1.0));
    let h1 = susy_perturbations::<Quad>(1.0).swap_remove(0).1;
    let cfg = SweepConfig::default();
    c.bench_function("sweep/susy4_p1", |b| {
        b.iter(|| run_sweep(black_box(&h), black_box(&h1), C64::new(0.0, 0.0), &cfg, None).unwrap())
    });
    let mut g = c.benchmark_group("fig1");
    g.sample_size(10);
    g.bench_function("compute", |b| b.iter(|| fig1_compute(&cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, eigen, decompositions, sweeps);
criterion_main!(benches);
