//! Minkowski gauges of symmetric convex hulls and Caratheodory
//! memberships, both phrased as small linear programs.

use super::simplex::{solve_min, LpOutcome};
use super::StarProfile;
use crate::geom;

/// Result of a gauge evaluation.
#[derive(Clone, Debug)]
pub struct GaugeEval {
    pub value: f64,
    /// True when every profile radius is infinite: the gauge is identically
    /// zero and callers should treat the seminorm as degenerate.
    pub empty_body: bool,
    /// False when `x` lies outside the span of the body plus its recession
    /// subspace (the gauge is +inf there; `value` is set accordingly).
    pub feasible: bool,
    /// Supporting functional at x/value, in ambient coordinates; vanishes on
    /// the recession subspace.
    pub support: Option<Vec<f64>>,
}

fn orthogonalize(v: &[f64], bases: &[&[Vec<f64>]]) -> Option<Vec<f64>> {
    let mut w = v.to_vec();
    for basis in bases {
        for b in basis.iter() {
            let c = geom::dot(&w, b);
            for (wk, bk) in w.iter_mut().zip(b) {
                *wk -= c * bk;
            }
        }
    }
    let len = geom::norm2(&w);
    (len > 1e-9).then(|| geom::scale(&w, 1.0 / len))
}

/// Orthonormal basis of the recession span, then of its complement.
pub(crate) fn split_basis(profile: &StarProfile) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = profile.dim();
    let mut rec: Vec<Vec<f64>> = Vec::new();
    for u in profile.recession_dirs() {
        if let Some(b) = orthogonalize(&u, &[&rec]) {
            rec.push(b);
        }
    }
    let mut comp: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        if rec.len() + comp.len() == n {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        if let Some(b) = orthogonalize(&e, &[&rec, &comp]) {
            comp.push(b);
        }
    }
    (rec, comp)
}

fn project(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    basis.iter().map(|b| geom::dot(b, x)).collect()
}

fn lift(basis: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = basis.first().map_or(0, |b| b.len());
    let mut out = vec![0.0; n];
    for (b, &c) in basis.iter().zip(y) {
        for (o, bk) in out.iter_mut().zip(b) {
            *o += c * bk;
        }
    }
    out
}

/// Minkowski functional of the closed symmetric convex hull of the profile's
/// finite points, with infinite-radius directions acting as recession
/// directions (adding any multiple of them is free).
///
/// Computed as min sum(lambda) subject to sum(lambda_j p_j) = x in the
/// coordinates orthogonal to the recession span, lambda >= 0.
pub fn gauge_of_hull(profile: &StarProfile, x: &[f64]) -> GaugeEval {
    if profile.is_empty_body() {
        return GaugeEval {
            value: 0.0,
            empty_body: true,
            feasible: true,
            support: None,
        };
    }
    let (rec, comp) = split_basis(profile);
    if comp.is_empty() {
        // recession span is everything
        return GaugeEval {
            value: 0.0,
            empty_body: false,
            feasible: true,
            support: None,
        };
    }
    let points = profile.hull_points();
    let m = comp.len();
    let xp = project(&comp, x);
    if xp.iter().all(|v| v.abs() < 1e-14) {
        return GaugeEval {
            value: 0.0,
            empty_body: false,
            feasible: true,
            support: None,
        };
    }
    let cols: Vec<Vec<f64>> = points.iter().map(|p| project(&comp, p)).collect();
    let c = vec![1.0; cols.len()];
    let a_rows: Vec<Vec<f64>> = (0..m)
        .map(|r| cols.iter().map(|col| col[r]).collect())
        .collect();
    debug_assert_eq!(rec.len() + comp.len(), x.len());
    match solve_min(&c, &a_rows, &xp) {
        LpOutcome::Optimal(res) => GaugeEval {
            value: res.objective.max(0.0),
            empty_body: false,
            feasible: true,
            support: Some(lift(&comp, &res.dual)),
        },
        LpOutcome::Infeasible => GaugeEval {
            value: f64::INFINITY,
            empty_body: false,
            feasible: false,
            support: None,
        },
        LpOutcome::Unbounded => unreachable!("gauge objective is bounded below by zero"),
    }
}

/// If `x` lies in the convex hull of `points`, returns at most n+1 of them
/// with convex weights reproducing `x`; `None` otherwise.
pub fn caratheodory_membership(points: &[Vec<f64>], x: &[f64]) -> Option<Vec<(usize, f64)>> {
    if points.is_empty() {
        return None;
    }
    let n = x.len();
    let cols = points.len();
    let c = vec![0.0; cols];
    let mut a_rows: Vec<Vec<f64>> = (0..n)
        .map(|r| points.iter().map(|p| p[r]).collect())
        .collect();
    a_rows.push(vec![1.0; cols]);
    let mut b = x.to_vec();
    b.push(1.0);
    match solve_min(&c, &a_rows, &b) {
        LpOutcome::Optimal(res) => {
            let mut support: Vec<(usize, f64)> = res
                .x
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 1e-12)
                .map(|(i, &w)| (i, w))
                .collect();
            debug_assert!(support.len() <= n + 1);
            // renormalize the tiny residue of dropped weights
            let total: f64 = support.iter().map(|(_, w)| w).sum();
            if total > 0.0 {
                for (_, w) in support.iter_mut() {
                    *w /= total;
                }
            }
            Some(support)
        }
        _ => None,
    }
}

/// Outward edge functionals of the symmetric convex polygon hull of a
/// centrally symmetric 2-D point set: value(x) = max |<a_e, x>| equals the
/// polygon's gauge. One functional per antipodal edge pair.
pub(crate) fn polygon_edge_functionals(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let scale = points.iter().fold(0.0_f64, |m, p| m.max(geom::norm2(p)));
    if scale <= 0.0 {
        return Vec::new();
    }
    // rank-1 fallback: all points on one line through the origin
    let pivot = points
        .iter()
        .max_by(|a, b| geom::norm2(a).total_cmp(&geom::norm2(b)))
        .unwrap();
    let pn = geom::normalize(pivot);
    let off_line = points
        .iter()
        .any(|p| (geom::dot(p, &pn).abs() - geom::norm2(p)).abs() > 1e-9 * scale);
    if !off_line {
        let r = geom::dot(pivot, &pn).abs();
        return vec![geom::scale(&pn, 1.0 / r)];
    }

    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14 * scale && (a.1 - b.1).abs() < 1e-14 * scale);
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let eps = 1e-12 * scale * scale;
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    let mut functionals = Vec::new();
    for i in 0..hull.len() {
        let p = hull[i];
        let q = hull[(i + 1) % hull.len()];
        // outward normal of edge p->q for a counterclockwise hull
        let nx = q.1 - p.1;
        let ny = p.0 - q.0;
        let b = nx * p.0 + ny * p.1;
        if b.abs() < 1e-12 * scale {
            continue; // edge through the origin: direction handled by its pair
        }
        let a = vec![nx / b, ny / b];
        // keep one representative per antipodal pair
        let canonical = a[0] > 1e-14 || (a[0].abs() <= 1e-14 && a[1] > 0.0);
        if canonical {
            functionals.push(a);
        }
    }
    functionals
}
