//! Homogeneity ratios along lines and the constructive seminorm built from
//! them.
//!
//! sigma(x,y) is the infimal ratio d(f(x'),f(y'))/|x'-y'| over
//! well-separated pairs on the chord that the line through x and y cuts in
//! the window 3Q^N. It depends only on the line, is scale-free, and is at
//! most the Lipschitz constant. The star body {sigma(u)|u| <= 1} has
//! radius 1/sigma(u) per direction; the gauge of its symmetric convex hull
//! is the constructed seminorm, with near-zero directions treated as
//! recession directions.

use super::hull::{gauge_of_hull, polygon_edge_functionals, split_basis};
use super::{AnalysisParams, PolyhedralSeminorm, StarProfile};
use crate::corpus::SampledMap;
use crate::dyadic::{BoxRegion, DyadicCube};
use crate::error::{Error, Result};
use crate::geom;
use crate::metricspace::distance;

/// Window 3Q^N for the chord; the ancestor clamps at the root.
fn chord_window(map: &SampledMap, q: &DyadicCube, p: &AnalysisParams) -> BoxRegion {
    let grid = map.grid();
    let (anc, _) = grid.ancestor_clamped(q, p.ancestor_levels);
    grid.dilated(&anc, 3.0)
}

/// Discretized infimum over pairs of `chord_points` equispaced midpoints on
/// the chord, restricted to separations of at least alpha * side(Q).
fn sigma_on_line(
    map: &SampledMap,
    q: &DyadicCube,
    origin: &[f64],
    dir: &[f64],
    p: &AnalysisParams,
) -> Result<f64> {
    let sep = p.alpha * map.grid().side_of(q);
    let window = chord_window(map, q, p);
    let (t0, t1) = geom::clip_line_to_box(origin, dir, &window.lo(), &window.hi())
        .ok_or(Error::ShortChord)?;
    let chord = t1 - t0;
    if chord < sep {
        return Err(Error::ShortChord);
    }
    let m = p.chord_points;
    let h = chord / m as f64;
    let points: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let t = t0 + (i as f64 + 0.5) * h;
            origin.iter().zip(dir).map(|(o, d)| o + t * d).collect()
        })
        .collect();
    let values: Vec<crate::metricspace::Point> = points
        .iter()
        .map(|x| map.eval(x))
        .collect::<Result<_>>()?;
    let min_gap = (sep / h).ceil().max(1.0) as usize;
    if min_gap >= m {
        return Err(Error::ShortChord);
    }
    let backend = map.backend();
    let mut best = f64::INFINITY;
    for i in 0..m {
        for j in (i + min_gap)..m {
            let d = distance(backend, &values[i], &values[j])?;
            let ratio = d / ((j - i) as f64 * h);
            if ratio < best {
                best = ratio;
            }
        }
    }
    Ok(best)
}

/// sigma(x, y): infimal homogeneity ratio of the line through x and y.
pub fn sigma(
    map: &SampledMap,
    q: &DyadicCube,
    x: &[f64],
    y: &[f64],
    p: &AnalysisParams,
) -> Result<f64> {
    let sep = p.alpha * map.grid().side_of(q);
    let w = geom::sub(y, x);
    let len = geom::norm2(&w);
    if len < sep {
        return Err(Error::PointsTooClose);
    }
    sigma_on_line(map, q, x, &geom::scale(&w, 1.0 / len), p)
}

/// sigma along the line through the cube center with direction `dir`.
/// A line equals its reverse, so this already carries the antipodal
/// symmetry sigma(u) = sigma(-u).
pub fn sigma_ray(
    map: &SampledMap,
    q: &DyadicCube,
    dir: &[f64],
    p: &AnalysisParams,
) -> Result<f64> {
    let center = map.grid().center(q);
    sigma_on_line(map, q, &center, dir, p)
}

/// Star profile of the cube: per-direction radii 1/sigma(u), with
/// directions whose sigma falls at or below the floor marked as recession
/// directions (radius = infinity).
pub fn build_star_profile(
    map: &SampledMap,
    q: &DyadicCube,
    p: &AnalysisParams,
) -> Result<StarProfile> {
    let n = map.n();
    let dirs = geom::direction_pairs(n, p.directions.max(if n == 1 { 1 } else { n + 1 }));
    let floor = p.sigma_floor_rel * map.l_hat();
    let mut radii = Vec::with_capacity(dirs.len());
    for u in &dirs {
        let s = sigma_ray(map, q, u, p)?;
        radii.push(if s <= floor { None } else { Some(1.0 / s) });
    }
    StarProfile::new(dirs, radii)
}

/// Extracts supporting functionals of the hull so that
/// max_k |<a_k, x>| reproduces the gauge: exact edge functionals after
/// projecting out the recession span when at most two dimensions remain,
/// LP supporting hyperplanes at the profile directions otherwise.
pub fn construct_seminorm(
    map: &SampledMap,
    q: &DyadicCube,
    p: &AnalysisParams,
) -> Result<PolyhedralSeminorm> {
    let profile = build_star_profile(map, q, p)?;
    seminorm_from_profile(&profile)
}

/// The gauge of a star profile as an explicit polyhedral seminorm.
pub fn seminorm_from_profile(profile: &StarProfile) -> Result<PolyhedralSeminorm> {
    let n = profile.dim();
    if profile.is_empty_body() {
        return Ok(PolyhedralSeminorm::zero(n));
    }
    let (_rec, comp) = split_basis(profile);
    if comp.is_empty() {
        return Ok(PolyhedralSeminorm::zero(n));
    }
    let points = profile.hull_points();
    let projected: Vec<Vec<f64>> = points
        .iter()
        .map(|pt| comp.iter().map(|b| geom::dot(b, pt)).collect())
        .collect();
    let lift = |a: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (b, &c) in comp.iter().zip(a) {
            for (o, bk) in out.iter_mut().zip(b) {
                *o += c * bk;
            }
        }
        out
    };
    let mut functionals: Vec<Vec<f64>> = Vec::new();
    match comp.len() {
        1 => {
            let r = projected
                .iter()
                .fold(0.0_f64, |m, pt| m.max(pt[0].abs()));
            if r > 0.0 {
                functionals.push(lift(&[1.0 / r]));
            }
        }
        2 => {
            for a in polygon_edge_functionals(&projected) {
                functionals.push(lift(&a));
            }
        }
        _ => {
            // supporting hyperplanes at the profile's own boundary points
            for (u, r) in profile.directions.iter().zip(&profile.radii) {
                if r.is_none() {
                    continue;
                }
                let eval = gauge_of_hull(profile, u);
                if let Some(a) = eval.support {
                    let redundant = functionals.iter().any(|f| {
                        geom::dist2(f, &a) < 1e-9 * (1.0 + geom::norm2(&a))
                    });
                    if !redundant {
                        functionals.push(a);
                    }
                }
            }
        }
    }
    PolyhedralSeminorm::new(n, functionals)
}
