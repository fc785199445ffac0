//! Multiplier kernels on the default thread pool versus a single thread.
//!
//! Without the `parallel` feature both variants run the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lame_spectral::norms::lr_norm;
use lame_spectral::propagator::{CauchyData, Propagator};
use lame_spectral::{par, Grid, LameParams, Space, VectorField};
use num_complex::Complex64;
use std::hint::black_box;

fn field(grid: Grid) -> VectorField {
    VectorField::from_site_fn(grid, Space::Physical, |site| {
        let x = site as f64;
        [
            Complex64::new((0.37 * x).sin(), 0.0),
            Complex64::new((0.11 * x).cos(), 0.2),
            Complex64::new(0.0, (0.05 * x).sin()),
        ]
    })
}

const MODES: [(&str, Option<usize>); 2] = [("pool", None), ("single", Some(1))];

fn run<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(t) => par::with_threads(t, f),
        None => f(),
    }
}

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft");
    for (n, points) in [(2, 256), (3, 32)] {
        let f = field(Grid::new(n, points, 10.0).unwrap());
        for (mode, threads) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, format!("{n}d-{points}")), &f, |b, f| {
                b.iter(|| run(threads, || black_box(f.to_frequency())))
            });
        }
    }
    group.finish();
}

fn bench_halfwave(c: &mut Criterion) {
    let mut group = c.benchmark_group("halfwave");
    let params = LameParams::new(2.0, 0.7).unwrap();
    for (n, points) in [(2, 128), (3, 16)] {
        let grid = Grid::new(n, points, 10.0).unwrap();
        let prop = Propagator::new(grid, params);
        let f = field(grid);
        for (mode, threads) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, format!("{n}d-{points}")), &f, |b, f| {
                b.iter(|| run(threads, || black_box(prop.halfwave(f, 1.3).unwrap())))
            });
        }
    }
    group.finish();
}

fn bench_evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    let grid = Grid::new(3, 16, 10.0).unwrap();
    let prop = Propagator::new(grid, LameParams::new(2.0, 0.7).unwrap());
    let data = CauchyData::new(field(grid), field(grid)).unwrap();
    let times: Vec<f64> = (0..8).map(|k| 0.25 * k as f64).collect();
    for (mode, threads) in MODES {
        group.bench_function(BenchmarkId::new(mode, "3d-16x8"), |b| {
            b.iter(|| {
                run(threads, || {
                    let mut acc = 0.0;
                    prop.evolve_each(&data, &times, |_, u| {
                        acc += lr_norm(u, 4.0)?;
                        Ok(())
                    })
                    .unwrap();
                    black_box(acc)
                })
            })
        });
    }
    group.finish();
}

fn bench_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("lr_norm");
    let f = field(Grid::new(3, 32, 10.0).unwrap());
    for r in [2.0, 4.0, f64::INFINITY] {
        for (mode, threads) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, format!("r={r}")), &f, |b, f| {
                b.iter(|| run(threads, || black_box(lr_norm(f, r).unwrap())))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_fft, bench_halfwave, bench_evolve, bench_norms);
criterion_main!(benches);
