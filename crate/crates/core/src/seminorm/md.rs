//! md estimates: how far the pulled-back metric is from the best seminorm
//! on a region, normalized by the region side.
//!
//! The general estimate is a certified upper bound: the best candidate
//! among the constructive seminorm, the minimax fit, the zero seminorm,
//! and anything the caller adds, evaluated as a sup over a deterministic
//! pair sample. A 1-D exact oracle minimizes over the one-parameter family
//! c|.| by ternary search on a convex objective.

use super::fit::fit_seminorm;
use super::sigma::construct_seminorm;
use super::{AnalysisParams, PolyhedralSeminorm};
use crate::corpus::SampledMap;
use crate::dyadic::{BoxRegion, DyadicCube};
use crate::error::Result;
use crate::geom;
use crate::rng;

/// Region an md estimate runs on: a dyadic cube, its concentric dilation,
/// or a free box. Cube-anchored regions get a constructive-seminorm
/// candidate built from the cube's chord window.
#[derive(Clone, Debug)]
pub enum MdRegion<'a> {
    Cube(&'a DyadicCube),
    Dilated(&'a DyadicCube, f64),
    Box(&'a BoxRegion),
}

#[derive(Clone, Debug)]
pub struct MdEstimate {
    pub value: f64,
    pub best: PolyhedralSeminorm,
    pub side: f64,
    pub pairs: usize,
}

/// Deterministic pair sample in a box: pairs drawn jointly from a
/// 2n-dimensional low-discrepancy sequence (covering positions and
/// separations alike), all corner/center pairs, and local lattice
/// neighbor pairs (table nodes for raw maps, a fixed fine lattice for
/// closed-form maps).
fn sample_pairs(
    map: &SampledMap,
    region: &BoxRegion,
    p: &AnalysisParams,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = map.n();
    let lo = region.lo();
    let side = region.side();
    let mut points: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();

    // low-discrepancy pairs: one 2n-dimensional point per pair
    for i in 0..p.pair_count as u64 {
        let h = geom::halton_point(i, 2 * n);
        let x: Vec<f64> = lo.iter().zip(&h[..n]).map(|(l, t)| l + t * side).collect();
        let y: Vec<f64> = lo.iter().zip(&h[n..]).map(|(l, t)| l + t * side).collect();
        points.push((x, y));
    }
    // corner and center pairs
    let mut anchors = region.corners();
    anchors.push(region.center.clone());
    for i in 0..anchors.len() {
        for j in (i + 1)..anchors.len() {
            points.push((anchors[i].clone(), anchors[j].clone()));
        }
    }
    // neighbor pairs on a local lattice
    let per = if map.is_closed_form() {
        if n == 1 {
            17
        } else {
            9
        }
    } else {
        let h = map.step();
        ((side / h).round() as usize + 1).min(if n == 1 { 33 } else { 9 })
    };
    let h = side / (per - 1) as f64;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = lo.iter().zip(&idx).map(|(l, &i)| l + i as f64 * h).collect();
        for axis in 0..n {
            if idx[axis] + 1 < per {
                let mut y = x.clone();
                y[axis] += h;
                points.push((x.clone(), y));
            }
        }
        let mut axis = n;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per {
                break;
            }
            idx[axis] = 0;
            if axis == 0 {
                axis = usize::MAX;
                break;
            }
        }
        if axis == usize::MAX {
            break;
        }
    }

    let mut pairs = Vec::with_capacity(points.len());
    for (x, y) in points {
        let w = geom::sub(&x, &y);
        if geom::norm2(&w) < 1e-12 * side {
            continue;
        }
        let d = map.dist(&x, &y)?;
        pairs.push((w, d));
    }
    Ok(pairs)
}

/// Minimum over candidate seminorms of the sup deviation
/// | d(f(x),f(y)) - ||x-y|| | over the pair sample, divided by the region
/// side. Candidates always include the zero seminorm, the minimax fit,
/// and (for cube-anchored regions) the constructive seminorm.
pub fn md_estimate(
    map: &SampledMap,
    region: MdRegion<'_>,
    extra: &[PolyhedralSeminorm],
    p: &AnalysisParams,
) -> Result<MdEstimate> {
    let grid = map.grid();
    let (bx, anchor) = match region {
        MdRegion::Cube(q) => (grid.cube_box(q), Some(q)),
        MdRegion::Dilated(q, f) => (grid.dilated(q, f), Some(q)),
        MdRegion::Box(b) => (b.clone(), None),
    };
    let pairs = sample_pairs(map, &bx, p)?;
    let n = map.n();

    let mut candidates: Vec<PolyhedralSeminorm> = vec![PolyhedralSeminorm::zero(n)];
    let mut fit_starts: Vec<PolyhedralSeminorm> = Vec::new();
    if let Some(q) = anchor {
        let constructed = construct_seminorm(map, q, p)?;
        fit_starts.push(constructed.clone());
        candidates.push(constructed);
    }
    for e in extra {
        fit_starts.push(e.clone());
    }
    let tag = anchor.map_or_else(
        || rng::derive_seed(0x626f_78, &[bx.half_side.to_bits()]),
        |q| grid.cube_key(q),
    );
    if let Ok(fitted) = fit_seminorm(&pairs, p.fit_functionals, &fit_starts, tag, p) {
        candidates.push(fitted);
    }
    candidates.extend_from_slice(extra);

    let side = bx.side();
    let mut best_idx = 0;
    let mut best_dev = f64::INFINITY;
    for (i, cand) in candidates.iter().enumerate() {
        let dev = pairs
            .iter()
            .fold(0.0_f64, |m, (w, d)| m.max((cand.value(w) - d).abs()));
        if dev < best_dev - 1e-15 {
            best_dev = dev;
            best_idx = i;
        }
    }
    Ok(MdEstimate {
        value: best_dev / side,
        best: candidates.swap_remove(best_idx),
        side,
        pairs: pairs.len(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct MdExact {
    pub value: f64,
    /// Optimal coefficient of the seminorm c|.|.
    pub coefficient: f64,
}

/// Exact 1-D md up to grid and search tolerance: seminorms on R are c|.|,
/// and c -> sup-deviation is convex, so ternary search over [0, l_hat]
/// finds the optimum.
pub fn md_exact_1d(map: &SampledMap, lo: f64, hi: f64, grid_points: usize) -> Result<MdExact> {
    assert!(hi > lo && grid_points >= 2);
    let g = grid_points;
    let xs: Vec<f64> = (0..g)
        .map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64)
        .collect();
    let mut seps = Vec::with_capacity(g * (g - 1) / 2);
    let mut dists = Vec::with_capacity(g * (g - 1) / 2);
    for i in 0..g {
        for j in (i + 1)..g {
            seps.push(xs[j] - xs[i]);
            dists.push(map.dist(&[xs[i]], &[xs[j]])?);
        }
    }
    let phi = |c: f64| -> f64 {
        seps.iter()
            .zip(&dists)
            .fold(0.0_f64, |m, (s, d)| m.max((d - c * s).abs()))
    };
    let mut a = 0.0;
    let mut b = map.l_hat().max(1e-12);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if phi(m1) <= phi(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let c = 0.5 * (a + b);
    Ok(MdExact {
        value: phi(c) / (hi - lo),
        coefficient: c,
    })
}
