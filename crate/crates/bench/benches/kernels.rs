use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64 as C;
use std::hint::black_box;
use twobody_core::quadrature::{integrate, QuadratureSpec};
use twobody_core::specfun::{dilog, ti2};
use twobody_core::wavefunction::{psi_atom, psi_free, psi_unified, FreeRegionTable};
use twobody_core::wiener_hopf::{j_direct, splus};
use twobody_core::{Method, ReducedParams};

fn special(c: &mut Criterion) {
    let z = C::new(0.7, 0.4);
    c.bench_function("dilog", |b| b.iter(|| dilog(black_box(z))));
    c.bench_function("ti2", |b| b.iter(|| ti2(black_box(z))));
}

fn factor(c: &mut Criterion) {
    let rp = ReducedParams::new(1.0, 2.0).unwrap();
    let k = C::new(1.0, 1.0);
    c.bench_function("splus closed form", |b| b.iter(|| splus(black_box(k), &rp)));
    c.bench_function("j_direct", |b| {
        b.iter(|| j_direct(black_box(k), &rp, 1e-10))
    });
}

fn quadrature(c: &mut Criterion) {
    let spec = QuadratureSpec::finite(0.0, 1.0)
        .singularity(0.0, -0.5)
        .tol(1e-12);
    c.bench_function("integrate x^-1/2 cos 20x", |b| {
        b.iter(|| {
            integrate(
                |x| C::new((20.0 * x).cos() / x.sqrt(), 0.0),
                black_box(&spec),
            )
        })
    });
}

fn wave(c: &mut Criterion) {
    let rp = ReducedParams::new(1.0, 2.0).unwrap();
    let mut g = c.benchmark_group("psi sample");
    g.sample_size(20);
    g.bench_function("free full contour", |b| {
        b.iter(|| psi_free(black_box(-5.0), 2.0, &rp, 1e-8, true))
    });
    g.bench_function("free upper side", |b| {
        b.iter(|| psi_free(black_box(-5.0), 2.0, &rp, 1e-8, false))
    });
    g.bench_function("atom", |b| {
        b.iter(|| psi_atom(black_box(3.0), 1.0, &rp, 1e-8))
    });
    g.bench_function("shifted line eps=1e-3", |b| {
        b.iter(|| psi_unified(black_box(3.0), 1.0, &rp, 1e-3, 1e-8))
    });
    let t = FreeRegionTable::new(-10.0, 300.0, &rp).unwrap();
    g.bench_function("table y=150", |b| {
        b.iter(|| t.sample(black_box(150.0), Method::Approx31))
    });
    g.finish();
}

criterion_group!(benches, special, factor, quadrature, wave);
criterion_main!(benches);
