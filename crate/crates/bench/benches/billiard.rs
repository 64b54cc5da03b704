use std::hint::black_box;

use billiard_bench::{fixture, start};
use billiard_core::atoms::{nonsaddle_atom, saddle_atom};
use billiard_core::cells::build_cell_complex;
use billiard_core::decomposition::partition;
use billiard_core::dynamics::trajectory;
use billiard_core::fiber::{level_complex, LevelOptions};
use billiard_core::topology::regular_fiber_on;
use criterion::{criterion_group, criterion_main, Criterion};

fn dynamics(c: &mut Criterion) {
    for name in ["A2", "NC2"] {
        let (d, _) = fixture(name);
        let p0 = start(&d);
        c.bench_function(&format!("trajectory_1000/{name}"), |b| {
            b.iter(|| trajectory(black_box(&p0), &d, 1000).unwrap())
        });
    }
}

fn topology(c: &mut Criterion) {
    let (d, p) = fixture("NC1");
    c.bench_function("partition/NC1", |b| b.iter(|| partition(black_box(&d)).unwrap()));
    c.bench_function("level_complex/NC1", |b| {
        b.iter(|| level_complex(&d, black_box(0.5), 2, &LevelOptions::standard()))
    });
    c.bench_function("regular_fiber/NC1", |b| b.iter(|| regular_fiber_on(&d, &p, black_box(0.5), 2).unwrap()));
    c.bench_function("cell_complex/NC1", |b| b.iter(|| build_cell_complex(&d, &p, black_box(1.5), 1).unwrap()));
}

fn atoms(c: &mut Criterion) {
    let mut g = c.benchmark_group("atoms");
    g.sample_size(10);
    let (a2, pa) = fixture("A2");
    g.bench_function("saddle/A2", |b| b.iter(|| saddle_atom(&a2, &pa).unwrap()));
    let (nc1, pn) = fixture("NC1");
    g.bench_function("nonsaddle/NC1", |b| b.iter(|| nonsaddle_atom(&nc1, &pn, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, dynamics, topology, atoms);
criterion_main!(benches);
