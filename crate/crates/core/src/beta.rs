//! Metric defect and beta numbers.
//!
//! The defect of an ordered triple is d(f(x),f(y)) + d(f(y),f(z)) -
//! d(f(x),f(z)); it vanishes exactly when the three images sit on a
//! geodesic in order. Squared segment betas average the defect over the
//! ordered triple simplex of a line segment; cube betas average segment
//! betas over random lines meeting the 7-fold dilation, with rotation
//! measure normalized to a probability and the offset slab measure kept
//! explicit. Chord geometry uses the Euclidean length along the line.

use crate::corpus::SampledMap;
use crate::dyadic::{enumerate_cubes, BoxRegion, DyadicCube};
use crate::error::{Error, Result};
use crate::exec;
use crate::geom;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A line segment in R^n.
#[derive(Clone, Debug)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Segment {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if geom::dist2(&a, &b) <= 0.0 {
            return Err(Error::DegenerateSegment);
        }
        Ok(Segment { a, b })
    }

    pub fn diam(&self) -> f64 {
        geom::dist2(&self.a, &self.b)
    }
}

/// Quadrature resolution: `m` midpoint nodes per simplex axis and
/// `mc_lines` sampled lines per cube.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub m: usize,
    pub mc_lines: usize,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn new(m: usize, mc_lines: usize, seed: u64) -> Result<Self> {
        if m < 8 || mc_lines < 64 {
            return Err(Error::Config(
                "quadrature needs m >= 8 and mc_lines >= 64".into(),
            ));
        }
        Ok(QuadratureSpec { m, mc_lines, seed })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            m: 32,
            mc_lines: 128,
            seed: 0,
        }
    }
}

/// Triangle-inequality defect of an ordered triple.
pub fn defect(map: &SampledMap, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    Ok(map.dist(x, y)? + map.dist(y, z)? - map.dist(x, z)?)
}

/// Squared-beta of a segment times diam^4: the triple integral of the
/// defect over the ordered simplex, by a composite midpoint rule with `m`
/// nodes per axis. Cells with repeated indices vanish because the defect
/// of a degenerate triple is zero at the midpoint.
fn segment_defect_integral(map: &SampledMap, seg: &Segment, m: usize) -> Result<f64> {
    let diam = seg.diam();
    let h = diam / m as f64;
    let dir: Vec<f64> = seg
        .a
        .iter()
        .zip(&seg.b)
        .map(|(a, b)| (b - a) / diam)
        .collect();
    let points: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            seg.a
                .iter()
                .zip(&dir)
                .map(|(a, d)| a + t * d)
                .collect()
        })
        .collect();
    let values: Vec<crate::metricspace::Point> = points
        .iter()
        .map(|p| map.eval(p))
        .collect::<Result<_>>()?;
    let backend = map.backend();
    // upper-triangular pairwise distances
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = crate::metricspace::distance(backend, &values[i], &values[j])?;
            dist[i * m + j] = d;
        }
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let dij = dist[i * m + j];
            let row_j = j * m;
            let row_i = i * m;
            let mut acc = 0.0;
            for k in (j + 1)..m {
                acc += dij + dist[row_j + k] - dist[row_i + k];
            }
            total += acc;
        }
    }
    Ok(total * h * h * h)
}

/// Beta number of a segment: sqrt of the simplex-averaged defect,
/// normalized by diam^4.
pub fn beta_segment(map: &SampledMap, seg: &Segment, m: usize) -> Result<f64> {
    let diam = seg.diam();
    if !(diam > 0.0) {
        return Err(Error::DegenerateSegment);
    }
    let integral = segment_defect_integral(map, seg, m)?;
    Ok((integral.max(0.0) / diam.powi(4)).sqrt())
}

/// Node count for the deterministic 7-fold window rule: at least `m` per
/// measured-cube side, rounded up to a prime so the equispaced midpoints
/// cannot resonate with dyadic-period structure in the map (an aligned
/// count can sample a periodic map as exactly constant).
pub fn window_nodes(m: usize) -> usize {
    let mut k = (7 * m).max(2);
    let is_prime = |v: usize| {
        if v < 4 {
            return v > 1;
        }
        if v % 2 == 0 {
            return false;
        }
        let mut d = 3;
        while d * d <= v {
            if v % d == 0 {
                return false;
            }
            d += 2;
        }
        true
    };
    while !is_prime(k) {
        k += 1;
    }
    k
}

/// Monte Carlo beta estimate for a box region, with enough detail to
/// compare runs: the squared value, its standard error, and the line
/// bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct BetaEstimate {
    pub beta: f64,
    pub beta_sq: f64,
    pub stderr_sq: f64,
    pub lines_hit: usize,
    pub lines_total: usize,
}

/// Beta of an arbitrary box region `B`: lines drawn through the window 7B,
/// each kept when its chord is at least side(B) long. Directions are
/// uniform on the hemisphere (rotations of a line double-cover the
/// directions), offsets uniform on the slab of the window's circumradius;
/// the slab measure multiplies the mean so the restriction to lines
/// meeting the window is exact. For n = 1 the rotation integral collapses
/// and the 7-fold window segment is integrated deterministically.
pub fn beta_box(
    map: &SampledMap,
    region: &BoxRegion,
    quad: &QuadratureSpec,
    stream_tags: &[u64],
) -> Result<BetaEstimate> {
    let n = map.n();
    let side = region.side();
    let window = region.dilated(7.0);
    if n == 1 {
        // deterministic convention: m counts nodes per measured-cube side,
        // so the 7-fold window keeps its structure resolved at every level
        let seg = Segment::new(window.lo(), window.hi())?;
        let beta = beta_segment(map, &seg, window_nodes(quad.m))?;
        return Ok(BetaEstimate {
            beta,
            beta_sq: beta * beta,
            stderr_sq: 0.0,
            lines_hit: 1,
            lines_total: 1,
        });
    }
    let mut rng = rng::stream(quad.seed, stream_tags);
    let radius = window.half_side * (n as f64).sqrt();
    let slab_measure = match n {
        2 => 2.0 * radius,
        3 => std::f64::consts::PI * radius * radius,
        _ => {
            return Err(Error::Config(
                "cube beta sampling supports n <= 3".into(),
            ))
        }
    };
    let lo = window.lo();
    let hi = window.hi();
    let mut samples = Vec::with_capacity(quad.mc_lines);
    let mut hits = 0usize;
    for _ in 0..quad.mc_lines {
        let dir = geom::sample_hemisphere_dir(&mut rng, n);
        let basis = geom::orthogonal_basis(&dir);
        // offset uniform in the (n-1)-ball of the circumradius
        let offset: Vec<f64> = loop {
            let w: Vec<f64> = (0..n - 1)
                .map(|_| rng.gen_range(-radius..=radius))
                .collect();
            if n == 2 || geom::norm2(&w) <= radius {
                break w;
            }
        };
        let mut p0 = window.center.clone();
        for (c, b) in offset.iter().zip(&basis) {
            for (pk, bk) in p0.iter_mut().zip(b) {
                *pk += c * bk;
            }
        }
        let contribution = match geom::clip_line_to_box(&p0, &dir, &lo, &hi) {
            Some((t0, t1)) if t1 - t0 >= side => {
                let a: Vec<f64> = p0.iter().zip(&dir).map(|(p, d)| p + t0 * d).collect();
                let b: Vec<f64> = p0.iter().zip(&dir).map(|(p, d)| p + t1 * d).collect();
                let beta = beta_segment(map, &Segment::new(a, b)?, quad.m)?;
                hits += 1;
                beta * beta
            }
            _ => 0.0,
        };
        samples.push(contribution);
    }
    if hits == 0 {
        return Err(Error::InsufficientCoverage);
    }
    let scale = slab_measure / side.powi(n as i32 - 1);
    let mean: f64 = samples.iter().sum::<f64>() / samples.len() as f64;
    let var: f64 = samples
        .iter()
        .map(|s| (s - mean) * (s - mean))
        .sum::<f64>()
        / (samples.len().saturating_sub(1).max(1)) as f64;
    let beta_sq = mean * scale;
    let stderr_sq = (var / samples.len() as f64).sqrt() * scale;
    Ok(BetaEstimate {
        beta: beta_sq.max(0.0).sqrt(),
        beta_sq,
        stderr_sq,
        lines_hit: hits,
        lines_total: samples.len(),
    })
}

/// Beta of a dyadic cube, with its RNG stream keyed by the cube.
pub fn beta_cube(map: &SampledMap, q: &DyadicCube, quad: &QuadratureSpec) -> Result<BetaEstimate> {
    let grid = map.grid();
    beta_box(map, &grid.cube_box(q), quad, &[grid.cube_key(q)])
}

/// One level's contribution to a beta packing sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaLevelSum {
    pub level: u32,
    pub cubes: usize,
    pub sum: f64,
}

/// Multiscale sum of beta(3Q^N)^2 vol(Q) over all cubes to `depth`, with
/// per-level partials. Ancestors above the root clamp to the root and are
/// counted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaSumReport {
    pub schema_version: u32,
    pub total: f64,
    pub ratio_to_l_hat: f64,
    pub l_hat: f64,
    pub per_level: Vec<BetaLevelSum>,
    pub clamped_count: usize,
    pub ancestor_levels: u32,
    pub depth: u32,
    pub seed: u64,
    pub quadrature_m: usize,
    pub quadrature_lines: usize,
}

/// Evaluates the packing sum by computing each distinct ancestor window
/// once (all descendants of an ancestor share the same dilated box) and
/// reducing in fixed cube order.
pub fn carleson_beta_sum(
    map: &SampledMap,
    depth: u32,
    ancestor_levels: u32,
    quad: &QuadratureSpec,
) -> Result<BetaSumReport> {
    map.check_resolution(depth, 8)?;
    let grid = map.grid();
    let root = grid.root();
    let cubes = enumerate_cubes(&root, depth);
    let mut clamped_count = 0usize;
    let mut ancestor_of: Vec<DyadicCube> = Vec::with_capacity(cubes.len());
    let mut unique: BTreeMap<DyadicCube, usize> = BTreeMap::new();
    for q in &cubes {
        let (a, clamped) = grid.ancestor_clamped(q, ancestor_levels);
        if clamped {
            clamped_count += 1;
        }
        let next = unique.len();
        unique.entry(a.clone()).or_insert(next);
        ancestor_of.push(a);
    }
    let ancestors: Vec<DyadicCube> = unique.keys().cloned().collect();
    let index_of: BTreeMap<&DyadicCube, usize> = ancestors
        .iter()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    let betas: Vec<Result<f64>> = exec::map_items(&ancestors, |a| {
        let region = grid.dilated(a, 3.0);
        beta_box(map, &region, quad, &[grid.cube_key(a)]).map(|e| e.beta_sq)
    });
    let mut beta_sq = Vec::with_capacity(ancestors.len());
    for b in betas {
        beta_sq.push(b?);
    }

    let mut per_level: Vec<BetaLevelSum> = (0..=depth)
        .map(|level| BetaLevelSum {
            level,
            cubes: 0,
            sum: 0.0,
        })
        .collect();
    for (q, a) in cubes.iter().zip(&ancestor_of) {
        let slot = &mut per_level[q.level as usize];
        slot.cubes += 1;
        slot.sum += beta_sq[index_of[a]] * grid.vol_of(q);
    }
    let total: f64 = per_level.iter().map(|l| l.sum).sum();
    let l_hat = map.l_hat();
    Ok(BetaSumReport {
        schema_version: 1,
        total,
        ratio_to_l_hat: if l_hat > 0.0 { total / l_hat } else { 0.0 },
        l_hat,
        per_level,
        clamped_count,
        ancestor_levels,
        depth,
        seed: quad.seed,
        quadrature_m: quad.m,
        quadrature_lines: quad.mc_lines,
    })
}
