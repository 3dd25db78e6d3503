//! Compares the per-cube analysis loops on one worker against the full
//! pool. Build with the default `parallel` feature for both rows; without
//! it only the sequential baseline runs.

use criterion::{criterion_group, criterion_main, Criterion};
use metricdiff_core::beta::{carleson_beta_sum, QuadratureSpec};
use metricdiff_core::carleson::md_profile;
use metricdiff_core::corpus::{lift_map, sample_map, MapSpec};
use metricdiff_core::dyadic::Grid;
use metricdiff_core::exec;
use metricdiff_core::seminorm::AnalysisParams;

fn bench_beta_sum(c: &mut Criterion) {
    let grid = Grid::new(vec![-1.0], 2.0).unwrap();
    let map = lift_map(&sample_map(&MapSpec::Corner { corner: 0.0 }, &grid, 9, 12).unwrap());
    let quad = QuadratureSpec { m: 24, mc_lines: 64, seed: 1 };
    let mut group = c.benchmark_group("carleson_beta_sum_corner_depth9");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            exec::with_workers(Some(1), || {
                carleson_beta_sum(&map, 9, 2, &quad).unwrap().total
            })
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            exec::with_workers(None, || {
                carleson_beta_sum(&map, 9, 2, &quad).unwrap().total
            })
        })
    });
    group.finish();
}

fn bench_md_profile(c: &mut Criterion) {
    let grid = Grid::new(vec![-1.0], 2.0).unwrap();
    let map = sample_map(&MapSpec::Corner { corner: 0.0 }, &grid, 9, 12).unwrap();
    let mut p = AnalysisParams::auto(1);
    p.chord_points = 32;
    p.pair_count = 96;
    p.fit_rounds = 6;
    p.fit_starts = 1;
    let mut group = c.benchmark_group("md_profile_corner_depth6");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| exec::with_workers(Some(1), || md_profile(&map, None, 6, &p).unwrap().len()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| exec::with_workers(None, || md_profile(&map, None, 6, &p).unwrap().len()))
    });
    group.finish();
}

criterion_group!(benches, bench_beta_sum, bench_md_profile);
criterion_main!(benches);
