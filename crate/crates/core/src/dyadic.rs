//! Dyadic cube bookkeeping: levels, ancestors, dilations, enumeration, and
//! the shifted grids of the 1/3-trick.
//!
//! Cubes are exact lattice objects (level plus integer coordinates); every
//! side, center, and volume derives from them, so partition identities and
//! containment tests do not drift. Dilations like 3Q and 7Q are free boxes,
//! never snapped back to the grid.

use crate::error::{Error, Result};
use crate::rng;

/// A dyadic grid: root cube geometry plus an optional shift in thirds of
/// the root side per axis (the 1/3-trick families).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    origin: Vec<f64>,
    side: f64,
    shift_thirds: Vec<i8>,
}

/// A cube of some grid: side `2^-level` times the root side, lattice
/// coordinates relative to the root's low corner.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub level: u32,
    pub coords: Vec<i64>,
}

/// Concentric dilation of a cube (3Q, 7Q, ...); generally not dyadic.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    pub center: Vec<f64>,
    pub half_side: f64,
}

/// Per-axis shift with entries in {0, +1/3, -1/3}, in units of the root side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridShift {
    pub thirds: Vec<i8>,
}

/// Result of the 1/3-trick search: `3Q` is contained in `cube + shift`.
#[derive(Clone, Debug)]
pub struct LocatedCover {
    pub shift: GridShift,
    pub cube: DyadicCube,
    /// side(cover) / side(Q); the achieved comparability constant.
    pub side_ratio: f64,
}

impl Grid {
    pub fn new(origin: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0) || origin.is_empty() {
            return Err(Error::Config("grid needs positive side and n >= 1".into()));
        }
        let n = origin.len();
        Ok(Grid {
            n,
            origin,
            side,
            shift_thirds: vec![0; n],
        })
    }

    /// Unit root grid on [0,1]^n.
    pub fn unit(n: usize) -> Self {
        Grid::new(vec![0.0; n], 1.0).unwrap()
    }

    pub fn with_shift(&self, shift: GridShift) -> Result<Self> {
        if shift.thirds.len() != self.n || shift.thirds.iter().any(|t| t.abs() > 1) {
            return Err(Error::Config("shift must have entries in {0,±1} thirds".into()));
        }
        Ok(Grid {
            shift_thirds: shift.thirds,
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shift_thirds(&self) -> &[i8] {
        &self.shift_thirds
    }

    pub fn root(&self) -> DyadicCube {
        DyadicCube {
            level: 0,
            coords: vec![0; self.n],
        }
    }

    pub fn side_at(&self, level: u32) -> f64 {
        self.side * 0.5_f64.powi(level as i32)
    }

    pub fn side_of(&self, q: &DyadicCube) -> f64 {
        self.side_at(q.level)
    }

    pub fn vol_of(&self, q: &DyadicCube) -> f64 {
        self.side_of(q).powi(self.n as i32)
    }

    /// Low corner of the cube in ambient coordinates.
    pub fn low_corner(&self, q: &DyadicCube) -> Vec<f64> {
        let s = self.side_of(q);
        (0..self.n)
            .map(|i| self.origin[i] + self.shift_thirds[i] as f64 * self.side / 3.0 + q.coords[i] as f64 * s)
            .collect()
    }

    pub fn center(&self, q: &DyadicCube) -> Vec<f64> {
        let s = self.side_of(q);
        let mut lo = self.low_corner(q);
        for c in lo.iter_mut() {
            *c += 0.5 * s;
        }
        lo
    }

    /// The concentric dilation `factor * Q` as a free box.
    pub fn dilated(&self, q: &DyadicCube, factor: f64) -> BoxRegion {
        BoxRegion {
            center: self.center(q),
            half_side: 0.5 * factor * self.side_of(q),
        }
    }

    pub fn cube_box(&self, q: &DyadicCube) -> BoxRegion {
        self.dilated(q, 1.0)
    }

    /// The 2^n children, in lexicographic coordinate order.
    pub fn children(&self, q: &DyadicCube) -> Vec<DyadicCube> {
        let n = self.n;
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u64 << n) {
            // lexicographic order: first axis is the most significant digit
            let coords: Vec<i64> = (0..n)
                .map(|i| 2 * q.coords[i] + ((mask >> (n - 1 - i)) & 1) as i64)
                .collect();
            out.push(DyadicCube {
                level: q.level + 1,
                coords,
            });
        }
        out
    }

    /// The unique dyadic cube containing `q` with side `2^levels_up` times
    /// side(q). Errors when that would rise above the root.
    pub fn ancestor(&self, q: &DyadicCube, levels_up: u32) -> Result<DyadicCube> {
        if levels_up > q.level {
            return Err(Error::AboveRoot {
                level: q.level,
                levels_up,
            });
        }
        Ok(DyadicCube {
            level: q.level - levels_up,
            coords: q.coords.iter().map(|&c| c >> levels_up).collect(),
        })
    }

    /// Ancestor clamped at the root; the flag records whether clamping fired.
    pub fn ancestor_clamped(&self, q: &DyadicCube, levels_up: u32) -> (DyadicCube, bool) {
        match self.ancestor(q, levels_up) {
            Ok(a) => (a, false),
            Err(_) => (self.root(), true),
        }
    }

    /// Deepest cube of the grid at `level` whose half-open box contains `p`,
    /// clamped into the root lattice range.
    pub fn cube_at(&self, level: u32, p: &[f64]) -> DyadicCube {
        let s = self.side_at(level);
        let max_coord = (1i64 << level) - 1;
        let coords = (0..self.n)
            .map(|i| {
                let lo = self.origin[i] + self.shift_thirds[i] as f64 * self.side / 3.0;
                (((p[i] - lo) / s).floor() as i64).clamp(0, max_coord)
            })
            .collect();
        DyadicCube { level, coords }
    }

    /// Stable 64-bit key for per-cube RNG streams and caches.
    pub fn cube_key(&self, q: &DyadicCube) -> u64 {
        let mut tags: Vec<u64> = Vec::with_capacity(q.coords.len() + 2);
        tags.push(q.level as u64);
        for (i, &c) in q.coords.iter().enumerate() {
            tags.push((c as u64) ^ rng::mix(i as u64 + 1));
        }
        for &s in &self.shift_thirds {
            tags.push((s as i64) as u64 ^ 0x5a5a);
        }
        rng::derive_seed(0x6379_6265, &tags)
    }
}

impl DyadicCube {
    /// Compact display id, e.g. `L5:(3,17)`.
    pub fn id(&self) -> String {
        let coords: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        format!("L{}:({})", self.level, coords.join(","))
    }
}

impl BoxRegion {
    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    pub fn lo(&self) -> Vec<f64> {
        self.center.iter().map(|c| c - self.half_side).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.center.iter().map(|c| c + self.half_side).collect()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .zip(&self.center)
            .all(|(x, c)| (x - c).abs() <= self.half_side + tol)
    }

    /// Concentric dilation of this box.
    pub fn dilated(&self, factor: f64) -> BoxRegion {
        BoxRegion {
            center: self.center.clone(),
            half_side: self.half_side * factor,
        }
    }

    /// All 2^n corners, lexicographic in sign pattern.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.center.len();
        (0..(1u64 << n))
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        let s = if (mask >> (n - 1 - i)) & 1 == 1 { 1.0 } else { -1.0 };
                        self.center[i] + s * self.half_side
                    })
                    .collect()
            })
            .collect()
    }
}

/// All dyadic subcubes of `base` down to `depth` levels below it,
/// level-major and lexicographic in coordinates within each level.
/// Exactly `sum_{j<=depth} 2^(j n)` cubes.
pub fn enumerate_cubes(base: &DyadicCube, depth: u32) -> Vec<DyadicCube> {
    let n = base.coords.len();
    let mut total = 0usize;
    for j in 0..=depth {
        total += 1usize << (j as usize * n);
    }
    let mut out = Vec::with_capacity(total);
    for j in 0..=depth {
        let span = 1i64 << j;
        let base_coords: Vec<i64> = base.coords.iter().map(|&c| c << j).collect();
        let mut offs = vec![0i64; n];
        loop {
            let coords: Vec<i64> = base_coords
                .iter()
                .zip(&offs)
                .map(|(b, o)| b + o)
                .collect();
            out.push(DyadicCube {
                level: base.level + j,
                coords,
            });
            // odometer, last axis fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                offs[axis] += 1;
                if offs[axis] < span {
                    break;
                }
                offs[axis] = 0;
                if axis == 0 {
                    axis = usize::MAX;
                    break;
                }
            }
            if axis == usize::MAX {
                break;
            }
        }
        if span == 1 {
            continue;
        }
    }
    debug_assert_eq!(out.len(), total);
    out
}

/// Exact-arithmetic search of the 1/3-trick: finds a shift `v` with entries
/// in {0,±1/3} and a dyadic cube `R` of the unshifted lattice such that
/// `3Q ⊆ R+v`, preferring the smallest workable `R`. All containment checks
/// run in integer units of `side(root)/(3·2^(level+1))`.
///
/// Requires side(Q) ≤ 1/6 of the root side. The achieved ratio
/// side(R)/side(Q) is reported rather than asserted; the search starts at
/// side(R) = 4·side(Q), the smallest dyadic side that can fit 3Q.
pub fn shifted_grid_locate(grid: &Grid, q: &DyadicCube) -> Result<LocatedCover> {
    let l = q.level;
    if l < 3 {
        // side 2^-l > 1/6 of the root side
        return Err(Error::TooLarge);
    }
    let n = grid.n();
    // units: u = side(root) / (3 * 2^(l+1))
    let unit_pow: u32 = l + 1;
    let third_u: i128 = 1i128 << unit_pow; // 1/3 of root side, in u
    let mut lo_u = Vec::with_capacity(n);
    let mut hi_u = Vec::with_capacity(n);
    for i in 0..n {
        let center = 3 * (2 * q.coords[i] as i128 + 1) + grid.shift_thirds[i] as i128 * third_u;
        lo_u.push(center - 9);
        hi_u.push(center + 9);
    }
    for m in (0..=l.saturating_sub(2)).rev() {
        let cell_u: i128 = 3 * (1i128 << (unit_pow - m));
        let lattice_max: i128 = 1i128 << m;
        let mut shift = Vec::with_capacity(n);
        let mut coords = Vec::with_capacity(n);
        let mut ok = true;
        'axis: for i in 0..n {
            for &v in &[0i128, 1, -1] {
                let off = v * third_u;
                let k = (lo_u[i] - off).div_euclid(cell_u);
                if k >= 0 && k < lattice_max && (k + 1) * cell_u + off >= hi_u[i] {
                    // exact containment: k*cell+off <= lo and hi <= (k+1)*cell+off
                    debug_assert!(k * cell_u + off <= lo_u[i]);
                    shift.push(v as i8);
                    coords.push(k as i64);
                    continue 'axis;
                }
            }
            ok = false;
            break;
        }
        if ok {
            return Ok(LocatedCover {
                shift: GridShift { thirds: shift },
                cube: DyadicCube { level: m, coords },
                side_ratio: (1u64 << (l - m)) as f64,
            });
        }
    }
    // Unreachable for side(Q) <= 1/6: at m=0 one of the three unit translates
    // always contains 3Q. Kept as an error to avoid a panic path.
    Err(Error::Config(format!(
        "1/3-trick search failed for cube {}",
        q.id()
    )))
}

/// All 3^n shifts with entries in {0,+1/3,-1/3}, deterministic order.
pub fn all_shifts(n: usize) -> Vec<GridShift> {
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    let mut idx = vec![0usize; n];
    let opts = [0i8, 1, -1];
    loop {
        out.push(GridShift {
            thirds: idx.iter().map(|&i| opts[i]).collect(),
        });
        let mut axis = n;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < 3 {
                break;
            }
            idx[axis] = 0;
            if axis == 0 {
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid_1d() -> Grid {
        Grid::new(vec![0.0], 1.0).unwrap()
    }

    #[test]
    fn ancestor_binary_ancestry() {
        // [0,1/4) at level 2 in root [0,1): one level up is [0,1/2)
        let g = unit_grid_1d();
        let q = DyadicCube { level: 2, coords: vec![0] };
        let a = g.ancestor(&q, 1).unwrap();
        assert_eq!(a, DyadicCube { level: 1, coords: vec![0] });
        // identity case
        assert_eq!(g.ancestor(&q, 0).unwrap(), q);
    }

    #[test]
    fn ancestor_found_by_enumeration_oracle() {
        // [1/2, 5/8) at level 3; its level-1 container located by scanning
        // every level-1 cube and testing box containment.
        let g = unit_grid_1d();
        let q = DyadicCube { level: 3, coords: vec![4] };
        let expect = g.ancestor(&q, 2).unwrap();
        let qb = g.cube_box(&q);
        let mut container = None;
        for cand in enumerate_cubes(&g.root(), 1) {
            if cand.level != 1 {
                continue;
            }
            let cb = g.cube_box(&cand);
            if cb.contains(&qb.lo(), 1e-12) && cb.contains(&qb.hi(), 1e-12) {
                container = Some(cand);
            }
        }
        assert_eq!(container.unwrap(), expect);
        let lo = g.low_corner(&expect);
        assert!((lo[0] - 0.5).abs() < 1e-15 && (g.side_of(&expect) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ancestor_above_root_errors() {
        let g = unit_grid_1d();
        let q = DyadicCube { level: 1, coords: vec![1] };
        assert!(matches!(
            g.ancestor(&q, 2),
            Err(Error::AboveRoot { .. })
        ));
        let (a, clamped) = g.ancestor_clamped(&q, 2);
        assert!(clamped);
        assert_eq!(a, g.root());
    }

    #[test]
    fn enumeration_counts() {
        let g1 = unit_grid_1d();
        assert_eq!(enumerate_cubes(&g1.root(), 2).len(), 7); // 1+2+4
        assert_eq!(enumerate_cubes(&g1.root(), 0), vec![g1.root()]);
        let g2 = Grid::unit(2);
        assert_eq!(enumerate_cubes(&g2.root(), 3).len(), 85); // 1+4+16+64
    }

    #[test]
    fn enumeration_is_level_major_lexicographic() {
        let g = Grid::unit(2);
        let cubes = enumerate_cubes(&g.root(), 2);
        let mut sorted = cubes.clone();
        sorted.sort();
        assert_eq!(cubes, sorted);
    }

    #[test]
    fn children_partition_exactly_and_ancestor_inverts() {
        let g = Grid::unit(2);
        for q in enumerate_cubes(&g.root(), 2) {
            let kids = g.children(&q);
            assert_eq!(kids.len(), 4);
            let vol: f64 = kids.iter().map(|k| g.vol_of(k)).sum();
            assert_eq!(vol, g.vol_of(&q)); // exact: dyadic powers
            for k in &kids {
                assert_eq!(g.ancestor(k, 1).unwrap(), q);
            }
        }
    }

    #[test]
    fn fixed_level_volume_sums_exactly_to_root() {
        let g = Grid::new(vec![-1.0, -1.0], 2.0).unwrap();
        for level in 0..5u32 {
            let total: f64 = enumerate_cubes(&g.root(), level)
                .iter()
                .filter(|q| q.level == level)
                .map(|q| g.vol_of(q))
                .sum();
            assert_eq!(total, g.vol_of(&g.root()));
        }
    }

    /// Exhaustive-oracle check of the cover: verifies 3Q ⊆ R+v with plain
    /// interval arithmetic on the returned cover.
    fn check_cover(g: &Grid, q: &DyadicCube, cover: &LocatedCover) {
        let qb = g.dilated(q, 3.0);
        let shifted = g.with_shift(cover.shift.clone()).unwrap();
        let rb = shifted.cube_box(&cover.cube);
        assert!(
            rb.contains(&qb.lo(), 1e-12) && rb.contains(&qb.hi(), 1e-12),
            "cover {:?} does not contain 3Q of {}",
            cover,
            q.id()
        );
    }

    #[test]
    fn shifted_locate_succeeds_on_every_small_cube() {
        let g = unit_grid_1d();
        for level in 3..=8u32 {
            for c in 0..(1i64 << level) {
                let q = DyadicCube { level, coords: vec![c] };
                let cover = shifted_grid_locate(&g, &q).unwrap();
                check_cover(&g, &q, &cover);
            }
        }
    }

    #[test]
    fn shifted_locate_near_midpoint_needs_nonzero_shift() {
        // Cube just left of 1/2: every unshifted dyadic cube of comparable
        // side has a boundary at 1/2 crossing 3Q, verified exhaustively.
        let g = unit_grid_1d();
        let level = 7u32;
        let q = DyadicCube { level, coords: vec![(1 << 6) - 1] };
        let qb = g.dilated(&q, 3.0);
        for m in 0..=(level - 2) {
            for k in 0..(1i64 << m) {
                let r = DyadicCube { level: m, coords: vec![k] };
                let rb = g.cube_box(&r);
                assert!(
                    !(rb.contains(&qb.lo(), -1e-12) && rb.contains(&qb.hi(), -1e-12))
                        || (1u64 << (level - m)) as f64 > 8.0,
                    "unexpected small unshifted container"
                );
            }
        }
        let cover = shifted_grid_locate(&g, &q).unwrap();
        check_cover(&g, &q, &cover);
        assert_ne!(cover.shift.thirds[0], 0);
        assert!(cover.side_ratio <= 8.0, "ratio {}", cover.side_ratio);
    }

    #[test]
    fn shifted_locate_deep_interior_allows_zero_shift() {
        // 3Q inside one dyadic cube of the unshifted grid.
        let g = unit_grid_1d();
        let q = DyadicCube { level: 5, coords: vec![9] }; // [9/32,10/32), 3Q=[0.25,0.34375] ⊂ [1/4,1/2)
        let cover = shifted_grid_locate(&g, &q).unwrap();
        check_cover(&g, &q, &cover);
        assert_eq!(cover.shift.thirds[0], 0);
    }

    #[test]
    fn shifted_locate_2d_and_ratio_reported() {
        let g = Grid::new(vec![-1.0, -1.0], 2.0).unwrap();
        let mut worst: f64 = 0.0;
        for q in enumerate_cubes(&g.root(), 6) {
            if q.level < 3 {
                continue;
            }
            let cover = shifted_grid_locate(&g, &q).unwrap();
            check_cover(&g, &q, &cover);
            worst = worst.max(cover.side_ratio);
        }
        assert!(worst <= 16.0, "worst cover ratio {}", worst);
    }

    #[test]
    fn all_shifts_count() {
        assert_eq!(all_shifts(1).len(), 3);
        assert_eq!(all_shifts(2).len(), 9);
    }
}
