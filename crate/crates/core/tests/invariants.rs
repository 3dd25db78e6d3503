//! Cross-module properties of the analysis pipeline, exercised on the
//! synthetic corpus at moderate depth.

use metricdiff_core::beta::{carleson_beta_sum, QuadratureSpec};
use metricdiff_core::carleson::{beta_vs_md_table, md_packing_sum};
use metricdiff_core::corpus::{lift_map, sample_map, MapSpec, SampledMap};
use metricdiff_core::dyadic::{all_shifts, DyadicCube, Grid};
use metricdiff_core::seminorm::{
    gauge_of_hull, md_estimate, md_exact_1d, sigma_ray, AnalysisParams, MdRegion,
    PolyhedralSeminorm,
};

fn corner_map() -> SampledMap {
    let grid = Grid::new(vec![-1.0], 2.0).unwrap();
    sample_map(&MapSpec::Corner { corner: 0.0 }, &grid, 11, 12).unwrap()
}

fn sawtooth_map(levels: usize) -> SampledMap {
    sample_map(&MapSpec::sawtooth_default(levels), &Grid::unit(1), 11, 12).unwrap()
}

fn broken_curve_map() -> SampledMap {
    let spec = MapSpec::BrokenCurve {
        vertices: vec![
            vec![0.0, 0.0],
            vec![0.4, 0.5],
            vec![0.1, 0.9],
            vec![0.8, 1.0],
        ],
        t_lo: 0.0,
        t_hi: 1.0,
    };
    sample_map(&spec, &Grid::unit(1), 11, 12).unwrap()
}

/// The general estimate may not drift more than 0.02 from the exact 1-D
/// optimum, in either direction, across the one-dimensional corpus.
#[test]
fn md_estimate_brackets_exact_oracle_on_1d_corpus() {
    // the exact oracle maximizes over a dense 33k-pair grid; give the
    // sampled estimate a comparable pair budget
    let mut p = AnalysisParams::auto(1).with_seed(21);
    p.pair_count = 4096;
    for (name, map) in [
        ("corner", corner_map()),
        ("sawtooth3", sawtooth_map(3)),
        ("brokencurve", broken_curve_map()),
    ] {
        let grid = map.grid().clone();
        for q in [
            grid.root(),
            DyadicCube { level: 2, coords: vec![1] },
            DyadicCube { level: 3, coords: vec![5] },
        ] {
            let b = grid.cube_box(&q);
            let est = md_estimate(&map, MdRegion::Cube(&q), &[], &p).unwrap();
            let exact = md_exact_1d(&map, b.lo()[0], b.hi()[0], 257).unwrap();
            assert!(
                (est.value - exact.value).abs() <= 0.02,
                "{name} {}: estimate {} vs exact {}",
                q.id(),
                est.value,
                exact.value
            );
        }
    }
}

/// Lifted affine maps pull back a norm, so the lifted md vanishes on
/// every cube.
#[test]
fn lifted_affine_md_vanishes_everywhere() {
    let lifted = lift_map(
        &sample_map(
            &MapSpec::Affine { matrix: vec![vec![1.0, 0.3], vec![-0.2, 1.0]] },
            &Grid::unit(2),
            5,
            12,
        )
        .unwrap(),
    );
    let mut p = AnalysisParams::auto(2);
    p.directions = 8;
    p.pair_count = 128;
    p.seed = 2;
    // the lifted pullback norm sqrt(|w|^2 + |Aw|^2) has a curved unit
    // ball, so the best K = 2n polyhedral fit keeps a small bias; "zero"
    // here means the three-percent level
    for q in metricdiff_core::dyadic::enumerate_cubes(&lifted.grid().root(), 3) {
        let est = md_estimate(&lifted, MdRegion::Cube(&q), &[], &p).unwrap();
        assert!(
            est.value <= 0.03 * lifted.l_hat(),
            "cube {}: lifted md {}",
            q.id(),
            est.value
        );
    }
}

/// Multiscale beta sums are monotone in depth, and plateau once the map's
/// cascade of scales has been passed. The 7(3Q^N) windows are 84 cube
/// sides wide at N = 2, so the single-kink maps plateau by depth 8 while
/// the four-tooth cascade (finest run 2^-5) needs depth 10.
#[test]
fn beta_sums_plateau_past_the_cascade() {
    let quad = QuadratureSpec { m: 16, mc_lines: 64, seed: 3 };
    let cases: [(&str, SampledMap, u32); 3] = [
        ("corner", corner_map(), 8),
        ("brokencurve", broken_curve_map(), 8),
        ("sawtooth4", sawtooth_map(4), 10),
    ];
    for (name, map, base_depth) in cases {
        let lifted = lift_map(&map);
        let shallow = carleson_beta_sum(&lifted, base_depth, 2, &quad).unwrap();
        let deep = carleson_beta_sum(&lifted, base_depth + 4, 2, &quad).unwrap();
        assert!(deep.total >= shallow.total, "{name}: monotone in depth");
        assert!(
            deep.total <= 1.1 * shallow.total + 1e-6,
            "{name}: {} -> {}",
            shallow.total,
            deep.total
        );
    }
}

/// Adding finer teeth adds defect: the lifted multiscale total grows
/// strictly with the number of teeth.
#[test]
fn sawtooth_beta_sum_grows_with_teeth() {
    let quad = QuadratureSpec { m: 16, mc_lines: 64, seed: 4 };
    let mut last = 0.0;
    for k in [2usize, 3, 4] {
        let total = carleson_beta_sum(&lift_map(&sawtooth_map(k)), 8, 2, &quad)
            .unwrap()
            .total;
        assert!(total > last, "K={k}: {total} vs {last}");
        last = total;
    }
}

/// Low lifted beta sits below high lifted beta in the md ordering: the
/// 95th percentile of md in the lowest beta decile is at most the 95th
/// percentile in the highest decile.
#[test]
fn beta_md_deciles_are_monotone() {
    // the beta window spans 84 cube sides at N = 2, so the association
    // needs depths where windows clear the map's cascade: the single-kink
    // maps separate by depth 7, the four-tooth cascade by depth 12
    let quad = QuadratureSpec { m: 16, mc_lines: 64, seed: 5 };
    for (name, map, depth) in [
        ("corner", corner_map(), 7u32),
        ("sawtooth4", sawtooth_map(4), 12),
        ("brokencurve", broken_curve_map(), 7),
    ] {
        let mut p = AnalysisParams::auto(1).with_seed(5);
        if depth > 8 {
            p.chord_points = 32;
            p.pair_count = 64;
            p.fit_rounds = 4;
            p.fit_starts = 1;
        }
        let rows = beta_vs_md_table(&map, depth, &p, &quad).unwrap();
        let decile = rows.len() / 10;
        assert!(decile >= 3, "need enough rows per decile");
        let pct95 = |slice: &[metricdiff_core::carleson::BetaMdRow]| {
            let mut mds: Vec<f64> = slice.iter().map(|r| r.md).collect();
            mds.sort_by(|a, b| a.total_cmp(b));
            mds[(mds.len() * 95) / 100]
        };
        let low = pct95(&rows[..decile]);
        let high = pct95(&rows[rows.len() - decile..]);
        assert!(
            low <= high + 1e-12,
            "{name}: low-decile p95 {low} vs high-decile p95 {high}"
        );
    }
}

/// Packing ratios computed against each of the 3^n shifted grids stay
/// within a factor four of one another.
#[test]
fn shifted_grid_packing_ratios_comparable() {
    let p = AnalysisParams::auto(1).with_seed(6);
    for (name, map, delta) in [
        ("corner", corner_map(), 0.25),
        ("sawtooth4", sawtooth_map(4), 0.25),
    ] {
        let mut ratios = Vec::new();
        for shift in all_shifts(1) {
            let rep = md_packing_sum(&map, Some(&shift), delta, 6, &p).unwrap();
            ratios.push(rep.ratio);
        }
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            max <= 4.0 * min + 1e-9,
            "{name}: shifted ratios {ratios:?}"
        );
    }
}

/// The hull gauge built from ray ratios is sandwiched by the ratios
/// themselves on norm pullbacks (both mixed gauges, not just l1).
#[test]
fn gauge_sandwich_on_linf_pullback() {
    let map = sample_map(
        &MapSpec::NormPullback { gauge: PolyhedralSeminorm::linf(2) },
        &Grid::unit(2),
        5,
        12,
    )
    .unwrap();
    let mut p = AnalysisParams::auto(2);
    p.directions = 16;
    let q = DyadicCube { level: 2, coords: vec![2, 1] };
    let profile = metricdiff_core::seminorm::build_star_profile(&map, &q, &p).unwrap();
    let ap = p.alpha_prime();
    for u in &profile.directions {
        let s = sigma_ray(&map, &q, u, &p).unwrap();
        let g = gauge_of_hull(&profile, u).value;
        assert!(g <= s + 0.02 && g >= s * (1.0 - ap) - 0.02, "{g} vs {s}");
    }
}

/// A map ingested from raw CSV drives the same analyses as its closed
/// form, down to the depth its table resolves; past that the resolution
/// guard fires.
#[test]
fn raw_csv_map_supports_shallow_analysis() {
    // margin 21: the root-clamped beta windows span 7 * 3 root sides
    let grid = Grid::new(vec![-1.0], 2.0).unwrap();
    let spec = MapSpec::Corner { corner: 0.0 };
    let closed = sample_map(&spec, &grid, 6, 21).unwrap();
    let dir = std::env::temp_dir().join("metricdiff-invariants-raw");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("corner.csv");
    metricdiff_core::corpus::emit_map_csv(&closed, &path).unwrap();
    let raw = metricdiff_core::corpus::ingest_map_csv(&path, 1, 21, None).unwrap();

    let mut p = AnalysisParams::auto(1).with_seed(12);
    p.pair_count = 128;
    let est_raw = md_estimate(&raw, MdRegion::Cube(&raw.root()), &[], &p).unwrap();
    let est_closed = md_estimate(&closed, MdRegion::Cube(&closed.root()), &[], &p).unwrap();
    assert!(
        (est_raw.value - est_closed.value).abs() <= 0.05,
        "raw {} vs closed {}",
        est_raw.value,
        est_closed.value
    );

    let quad = QuadratureSpec { m: 8, mc_lines: 64, seed: 1 };
    assert!(carleson_beta_sum(&raw, 3, 2, &quad).unwrap().total > 0.0);
    // 2^6 nodes per root side cannot give 8 nodes per cube at depth 4
    assert!(matches!(
        metricdiff_core::carleson::md_profile(&raw, None, 4, &p),
        Err(metricdiff_core::error::Error::ResolutionTooCoarse { .. })
    ));
    std::fs::remove_file(&path).ok();
}

/// Rerunning an analysis with the same seed reproduces the serialized
/// report byte for byte.
#[test]
fn packing_reports_reproduce_bytes() {
    let map = corner_map();
    let mut p = AnalysisParams::auto(1);
    p.seed = 77;
    p.pair_count = 128;
    let a = md_packing_sum(&map, None, 0.25, 5, &p).unwrap();
    let b = md_packing_sum(&map, None, 0.25, 5, &p).unwrap();
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    assert_eq!(ja, jb);
}
