//! Synthetic Lipschitz map families, grid sampling over an enlarged root,
//! graph lifting, and Lipschitz-constant estimation.
//!
//! Every family evaluates in closed form on all of R^n, each with a
//! closed-form Lipschitz bound; sampled tables exist for node scans and for
//! maps that arrive as raw data. Domain separations use the Euclidean norm
//! throughout.

use crate::dyadic::{DyadicCube, Grid};
use crate::error::{Error, Result};
use crate::geom;
use crate::metricspace::{distance, DistanceMatrix, MetricBackend, Point};
use crate::seminorm::PolyhedralSeminorm;
use rand::Rng;
use std::path::Path;

/// Closed-form map family with parameters.
#[derive(Clone, Debug)]
pub enum MapSpec {
    /// x -> Ax into sup-norm R^m (rows of `matrix` are the m functionals).
    Affine { matrix: Vec<Vec<f64>> },
    /// Identity map into (R^n, gauge): pure norm pullback.
    NormPullback { gauge: PolyhedralSeminorm },
    /// t -> |t - corner| into R.
    Corner { corner: f64 },
    /// Sum of triangle waves: t -> sum_k amp_k * tri(t / period_k), where
    /// tri is the 1-periodic distance to the nearest integer.
    Sawtooth { teeth: Vec<(f64, f64)> },
    /// x -> (|x - p|_2)_{p in sites} into sup-norm R^{#sites}.
    DistanceCoords { sites: Vec<Vec<f64>> },
    /// Piecewise-linear curve t -> R^m with vertices at evenly spaced
    /// parameters over [t_lo, t_hi], extended linearly beyond the ends.
    BrokenCurve {
        vertices: Vec<Vec<f64>>,
        t_lo: f64,
        t_hi: f64,
    },
}

fn triangle_wave(u: f64) -> f64 {
    (u - u.round()).abs()
}

impl MapSpec {
    /// Default sawtooth cascade: `levels` teeth with halving periods
    /// (1/2, 1/4, ...) and slopes 6^-k, so the cascade's active scales
    /// finish within a few levels of the root and the fine teeth's kinks
    /// stay metrically small next to the total Lipschitz constant.
    pub fn sawtooth_default(levels: usize) -> MapSpec {
        let teeth = (0..levels)
            .map(|k| {
                let s = 0.5 * 0.5_f64.powi(k as i32);
                let slope = 6.0_f64.powi(-(k as i32));
                (s * slope, s)
            })
            .collect();
        MapSpec::Sawtooth { teeth }
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            MapSpec::Affine { matrix } => matrix.first().map_or(1, |r| r.len()),
            MapSpec::NormPullback { gauge } => gauge.dim(),
            MapSpec::Corner { .. } | MapSpec::Sawtooth { .. } | MapSpec::BrokenCurve { .. } => 1,
            MapSpec::DistanceCoords { sites } => sites.first().map_or(1, |s| s.len()),
        }
    }

    /// Closed-form Lipschitz bound with respect to the Euclidean domain norm.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            MapSpec::Affine { matrix } => matrix.iter().fold(0.0, |m, r| m.max(geom::norm2(r))),
            MapSpec::NormPullback { gauge } => gauge.operator_bound(),
            MapSpec::Corner { .. } => 1.0,
            MapSpec::Sawtooth { teeth } => teeth.iter().map(|(a, s)| a / s).sum(),
            MapSpec::DistanceCoords { sites } => {
                if sites.is_empty() {
                    0.0
                } else {
                    1.0
                }
            }
            MapSpec::BrokenCurve { vertices, t_lo, t_hi } => {
                if vertices.len() < 2 {
                    return 0.0;
                }
                let dt = (t_hi - t_lo) / (vertices.len() - 1) as f64;
                vertices
                    .windows(2)
                    .fold(0.0, |m, w| m.max(geom::norm_inf(&geom::sub(&w[1], &w[0])) / dt))
            }
        }
    }

    pub fn backend(&self) -> MetricBackend {
        match self {
            MapSpec::Affine { matrix } => MetricBackend::SupNorm { dim: matrix.len() },
            MapSpec::NormPullback { gauge } => MetricBackend::NormedPlane { gauge: gauge.clone() },
            MapSpec::Corner { .. } | MapSpec::Sawtooth { .. } => MetricBackend::SupNorm { dim: 1 },
            MapSpec::DistanceCoords { sites } => MetricBackend::SupNorm { dim: sites.len() },
            MapSpec::BrokenCurve { vertices, .. } => MetricBackend::SupNorm {
                dim: vertices.first().map_or(0, |v| v.len()),
            },
        }
    }

    /// Closed-form evaluation; defined on all of R^n.
    pub fn eval(&self, x: &[f64]) -> Point {
        debug_assert_eq!(x.len(), self.domain_dim());
        match self {
            MapSpec::Affine { matrix } => {
                Point::Vector(matrix.iter().map(|r| geom::dot(r, x)).collect())
            }
            MapSpec::NormPullback { .. } => Point::Vector(x.to_vec()),
            MapSpec::Corner { corner } => Point::Vector(vec![(x[0] - corner).abs()]),
            MapSpec::Sawtooth { teeth } => Point::Vector(vec![teeth
                .iter()
                .map(|(a, s)| a * triangle_wave(x[0] / s))
                .sum()]),
            MapSpec::DistanceCoords { sites } => {
                Point::Vector(sites.iter().map(|p| geom::dist2(x, p)).collect())
            }
            MapSpec::BrokenCurve { vertices, t_lo, t_hi } => {
                let k = vertices.len();
                if k == 1 {
                    return Point::Vector(vertices[0].clone());
                }
                let dt = (t_hi - t_lo) / (k - 1) as f64;
                let s = (x[0] - t_lo) / dt;
                let seg = (s.floor() as i64).clamp(0, k as i64 - 2) as usize;
                let frac = s - seg as f64; // may exceed [0,1]: linear extension
                let v = vertices[seg]
                    .iter()
                    .zip(&vertices[seg + 1])
                    .map(|(a, b)| a + frac * (b - a))
                    .collect();
                Point::Vector(v)
            }
        }
    }

    /// Family name used by the CLI and reports.
    pub fn family(&self) -> &'static str {
        match self {
            MapSpec::Affine { .. } => "affine",
            MapSpec::NormPullback { .. } => "normpullback",
            MapSpec::Corner { .. } => "corner",
            MapSpec::Sawtooth { .. } => "sawtooth",
            MapSpec::DistanceCoords { .. } => "distancecoords",
            MapSpec::BrokenCurve { .. } => "brokencurve",
        }
    }
}

#[derive(Clone, Debug)]
enum ValueTable {
    Vectors { dim: usize, data: Vec<f64> },
    Indices(Vec<usize>),
}

/// A Lipschitz map sampled on a regular grid over the margin-enlarged root,
/// with a metric backend and an estimated Lipschitz constant.
#[derive(Clone, Debug)]
pub struct SampledMap {
    spec: Option<MapSpec>,
    grid: Grid,
    /// Enlargement factor: the table covers `margin * side(root)` centered
    /// at the root center, so dilations like 3Q^N and 7Q keep data.
    margin: u32,
    /// Grid step h = side(root) / 2^resolution.
    resolution: u32,
    /// Low corner of the sampled domain; fixed at sampling time so that
    /// shifted-grid analyses do not move the table.
    domain_lo: Vec<f64>,
    table: ValueTable,
    backend: MetricBackend,
    l_hat: f64,
    l_spec: Option<f64>,
    lifted: bool,
}

/// Margin large enough for every 3Q^N and 7Q dilation met while scanning
/// to any depth with ancestor level `n_up`.
pub fn margin_for(n_up: u32) -> u32 {
    7u32.max(3 * (1u32 << n_up))
}

impl SampledMap {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn root(&self) -> DyadicCube {
        self.grid.root()
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn backend(&self) -> &MetricBackend {
        &self.backend
    }

    pub fn l_hat(&self) -> f64 {
        self.l_hat
    }

    pub fn l_spec(&self) -> Option<f64> {
        self.l_spec
    }

    pub fn spec(&self) -> Option<&MapSpec> {
        self.spec.as_ref()
    }

    pub fn is_closed_form(&self) -> bool {
        self.spec.is_some()
    }

    pub fn is_lifted(&self) -> bool {
        self.lifted
    }

    pub fn margin(&self) -> u32 {
        self.margin
    }

    /// Grid step of the sampled table.
    pub fn step(&self) -> f64 {
        self.grid.side() * 0.5_f64.powi(self.resolution as i32)
    }

    /// Low corner of the sampled (margin-enlarged) domain.
    pub fn domain_lo(&self) -> Vec<f64> {
        self.domain_lo.clone()
    }

    pub fn domain_hi(&self) -> Vec<f64> {
        let width = self.margin as f64 * self.grid.side();
        self.domain_lo.iter().map(|l| l + width).collect()
    }

    /// The same map viewed through a grid translated by thirds of the root
    /// side. The sampled table and Lipschitz estimate stay put; only cube
    /// bookkeeping moves.
    pub fn with_shift(&self, shift: crate::dyadic::GridShift) -> Result<SampledMap> {
        let mut out = self.clone();
        out.grid = self.grid.with_shift(shift)?;
        Ok(out)
    }

    fn nodes_per_axis(&self) -> usize {
        (self.margin as usize) * (1usize << self.resolution) + 1
    }

    fn node_position(&self, idx: &[usize]) -> Vec<f64> {
        let h = self.step();
        self.domain_lo()
            .iter()
            .zip(idx)
            .map(|(lo, &i)| lo + i as f64 * h)
            .collect()
    }

    fn table_point(&self, flat: usize) -> Point {
        match &self.table {
            ValueTable::Vectors { dim, data } => {
                Point::Vector(data[flat * dim..(flat + 1) * dim].to_vec())
            }
            ValueTable::Indices(ix) => Point::Index(ix[flat]),
        }
    }

    /// Raw (unlifted) evaluation: closed form when a spec is present,
    /// nearest sampled node otherwise.
    fn eval_fiber(&self, x: &[f64]) -> Result<Point> {
        if let Some(spec) = &self.spec {
            return Ok(spec.eval(x));
        }
        let h = self.step();
        let lo = self.domain_lo();
        let per = self.nodes_per_axis();
        let mut flat = 0usize;
        for i in 0..x.len() {
            let t = (x[i] - lo[i]) / h;
            let k = t.round();
            if k < -0.5 || k > (per - 1) as f64 + 0.5 {
                return Err(Error::OutOfDomain);
            }
            flat = flat * per + (k as usize).min(per - 1);
        }
        Ok(self.table_point(flat))
    }

    /// Evaluation including the graph lift when active.
    pub fn eval(&self, x: &[f64]) -> Result<Point> {
        let fiber = self.eval_fiber(x)?;
        if self.lifted {
            Ok(Point::Lifted {
                base: x.to_vec(),
                fiber: Box::new(fiber),
            })
        } else {
            Ok(fiber)
        }
    }

    /// Pullback distance d(f(x), f(y)).
    pub fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        distance(&self.backend, &self.eval(x)?, &self.eval(y)?)
    }

    /// Requires at least `need` sampled nodes per cube side at `depth`
    /// below the root; closed-form maps always pass.
    pub fn check_resolution(&self, depth: u32, need: usize) -> Result<()> {
        if self.is_closed_form() {
            return Ok(());
        }
        let nodes = (1usize << self.resolution) >> depth.min(31);
        if nodes < need {
            return Err(Error::ResolutionTooCoarse { nodes, need });
        }
        Ok(())
    }
}

fn fill_table(spec: &MapSpec, grid: &Grid, resolution: u32, margin: u32) -> ValueTable {
    let n = grid.n();
    let per = (margin as usize) * (1usize << resolution) + 1;
    let h = grid.side() * 0.5_f64.powi(resolution as i32);
    let half = margin as f64 * grid.side() / 2.0;
    let lo: Vec<f64> = grid
        .center(&grid.root())
        .iter()
        .map(|c| c - half)
        .collect();
    let dim = match spec.backend() {
        MetricBackend::SupNorm { dim } => dim,
        MetricBackend::NormedPlane { gauge } => gauge.dim(),
        _ => 0,
    };
    let total = per.pow(n as u32);
    let mut data = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = lo.iter().zip(&idx).map(|(l, &i)| l + i as f64 * h).collect();
        match spec.eval(&x) {
            Point::Vector(v) => data.extend_from_slice(&v),
            _ => unreachable!("closed-form families are vector valued"),
        }
        let mut axis = n;
        loop {
            if axis == 0 {
                return ValueTable::Vectors { dim, data };
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per {
                break;
            }
            idx[axis] = 0;
            if axis == 0 {
                return ValueTable::Vectors { dim, data };
            }
        }
    }
}

/// Samples `spec` over the margin-enlarged root at step
/// `side(root)/2^resolution` and estimates its Lipschitz constant.
pub fn sample_map(spec: &MapSpec, root: &Grid, resolution: u32, margin: u32) -> Result<SampledMap> {
    if root.n() != spec.domain_dim() {
        return Err(Error::Config(format!(
            "map family {} has domain dimension {}, grid has {}",
            spec.family(),
            spec.domain_dim(),
            root.n()
        )));
    }
    if margin == 0 || resolution == 0 {
        return Err(Error::Config("margin and resolution must be positive".into()));
    }
    let table = fill_table(spec, root, resolution, margin);
    let half = margin as f64 * root.side() / 2.0;
    let domain_lo: Vec<f64> = root
        .center(&root.root())
        .iter()
        .map(|c| c - half)
        .collect();
    let mut map = SampledMap {
        spec: Some(spec.clone()),
        grid: root.clone(),
        margin,
        resolution,
        domain_lo,
        table,
        backend: spec.backend(),
        l_hat: 0.0,
        l_spec: Some(spec.lipschitz_bound()),
        lifted: false,
    };
    map.l_hat = lipschitz_estimate(&map);
    Ok(map)
}

/// Default table resolutions keeping tables small while resolving the
/// finest corpus features.
pub fn default_resolution(n: usize) -> u32 {
    match n {
        1 => 11,
        2 => 5,
        _ => 3,
    }
}

/// Interprets the map as its graph x -> (x, f(x)) into the product space
/// with the mixed metric sqrt(|du|_2^2 + d(v,v')^2).
pub fn lift_map(f: &SampledMap) -> SampledMap {
    if f.lifted {
        return f.clone();
    }
    let mut lifted = f.clone();
    lifted.backend = MetricBackend::lifted(f.backend.clone());
    lifted.lifted = true;
    lifted.l_spec = f.l_spec.map(|l| (1.0 + l * l).sqrt());
    lifted.l_hat = lipschitz_estimate(&lifted);
    lifted
}

/// Largest sampled ratio dist(f(x),f(y)) / |x-y|_2 over all adjacent node
/// pairs and 10^4 deterministic random pairs. Never exceeds the true
/// constant of an analytic family.
pub fn lipschitz_estimate(map: &SampledMap) -> f64 {
    let n = map.n();
    let per = map.nodes_per_axis();
    let h = map.step();
    let mut best = 0.0_f64;
    // adjacent-node scan
    let mut idx = vec![0usize; n];
    loop {
        let x = map.node_position(&idx);
        let px = map.eval(&x).expect("node in domain");
        for axis in 0..n {
            if idx[axis] + 1 < per {
                let mut jdx = idx.clone();
                jdx[axis] += 1;
                let y = map.node_position(&jdx);
                let py = map.eval(&y).expect("node in domain");
                let d = distance(&map.backend, &px, &py).expect("same backend");
                best = best.max(d / h);
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
    // random pairs; snapped to nodes for table-backed maps
    let lo = map.domain_lo();
    let hi = map.domain_hi();
    // fixed internal seed: the estimate is part of the map, not of a run
    let mut rng = crate::rng::stream(LIPSCHITZ_SCAN_SEED, &[n as u64, per as u64, map.lifted as u64]);
    for _ in 0..10_000 {
        let sample = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let t: f64 = rng.gen_range(0.0..=1.0);
                    let v = lo[i] + t * (hi[i] - lo[i]);
                    if map.is_closed_form() {
                        v
                    } else {
                        lo[i] + ((v - lo[i]) / h).round().clamp(0.0, (per - 1) as f64) * h
                    }
                })
                .collect()
        };
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let sep = geom::dist2(&x, &y);
        if sep < 1e-12 {
            continue;
        }
        if let Ok(d) = map.dist(&x, &y) {
            best = best.max(d / sep);
        }
    }
    best
}

const LIPSCHITZ_SCAN_SEED: u64 = 0x4c69_7073_6368_6974;

/// Writes the sampled table as CSV: n domain columns, then the value
/// columns (sup-norm targets) or the point index (matrix targets).
pub fn emit_map_csv(map: &SampledMap, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let n = map.n();
    let per = map.nodes_per_axis();
    let mut idx = vec![0usize; n];
    let total = per.pow(n as u32);
    for flat in 0..total {
        let x = map.node_position(&idx);
        let mut fields: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        match &map.table {
            ValueTable::Vectors { dim, data } => {
                for v in &data[flat * dim..(flat + 1) * dim] {
                    fields.push(format!("{v:?}"));
                }
            }
            ValueTable::Indices(ix) => fields.push(ix[flat].to_string()),
        }
        writeln!(out, "{}", fields.join(","))?;
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
        }
    }
    Ok(())
}

/// Reads a raw map from CSV: `n` domain columns, then either value columns
/// (sup-norm target) or a single point index resolved against `matrix`.
/// The nodes must form a full regular grid of square cells covering
/// `margin` root sides; the analysis root is the central cube.
pub fn ingest_map_csv(
    path: &Path,
    n: usize,
    margin: u32,
    matrix: Option<DistanceMatrix>,
) -> Result<SampledMap> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() <= n {
            return Err(Error::Parse(format!(
                "line {}: expected more than {} columns",
                lineno + 1,
                n
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        let x: Vec<f64> = fields[..n].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let v: Vec<f64> = fields[n..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        rows.push((x, v));
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty map file".into()));
    }
    // infer the axis lattice
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (x, _) in &rows {
        for (i, &xi) in x.iter().enumerate() {
            if !axes[i].iter().any(|&a| (a - xi).abs() < 1e-9) {
                axes[i].push(xi);
            }
        }
    }
    for ax in axes.iter_mut() {
        ax.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let per = axes[0].len();
    let h = if per > 1 { axes[0][1] - axes[0][0] } else { 1.0 };
    for ax in &axes {
        if ax.len() != per {
            return Err(Error::Parse("axes have different node counts".into()));
        }
        for w in ax.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::Parse("nodes are not equispaced".into()));
            }
        }
    }
    if rows.len() != per.pow(n as u32) {
        return Err(Error::Parse(format!(
            "expected {} grid rows, found {}",
            per.pow(n as u32),
            rows.len()
        )));
    }
    let width = h * (per - 1) as f64;
    let side = width / margin as f64;
    let center: Vec<f64> = axes.iter().map(|ax| 0.5 * (ax[0] + ax[per - 1])).collect();
    let origin: Vec<f64> = center.iter().map(|c| c - side / 2.0).collect();
    let grid = Grid::new(origin, side)?;
    let resolution = ((per - 1) as f64 / margin as f64).log2().round() as u32;
    if (margin as usize) * (1usize << resolution) + 1 != per {
        return Err(Error::Parse(
            "node count per axis must be margin * 2^resolution + 1".into(),
        ));
    }

    // place rows into table order
    let lo: Vec<f64> = axes.iter().map(|ax| ax[0]).collect();
    let total = rows.len();
    let dim = rows[0].1.len();
    let table = if let Some(m) = &matrix {
        if dim != 1 {
            return Err(Error::Parse("matrix-valued maps need one index column".into()));
        }
        let mut ix = vec![usize::MAX; total];
        for (x, v) in &rows {
            let flat = flat_index(x, &lo, h, per, n)?;
            let idx = v[0] as usize;
            if v[0].fract() != 0.0 || idx >= m.size() {
                return Err(Error::Parse(format!("bad point index {}", v[0])));
            }
            ix[flat] = idx;
        }
        if ix.iter().any(|&i| i == usize::MAX) {
            return Err(Error::Parse("missing grid nodes".into()));
        }
        ValueTable::Indices(ix)
    } else {
        let mut data = vec![f64::NAN; total * dim];
        for (x, v) in &rows {
            if v.len() != dim {
                return Err(Error::Parse("inconsistent value dimension".into()));
            }
            let flat = flat_index(x, &lo, h, per, n)?;
            data[flat * dim..(flat + 1) * dim].copy_from_slice(v);
        }
        if data.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("missing grid nodes".into()));
        }
        ValueTable::Vectors { dim, data }
    };

    let backend = match &matrix {
        Some(m) => MetricBackend::Matrix(m.clone()),
        None => MetricBackend::SupNorm { dim },
    };
    let mut map = SampledMap {
        spec: None,
        grid,
        margin,
        resolution,
        domain_lo: lo,
        table,
        backend,
        l_hat: 0.0,
        l_spec: None,
        lifted: false,
    };
    map.l_hat = lipschitz_estimate(&map);
    Ok(map)
}

fn flat_index(x: &[f64], lo: &[f64], h: f64, per: usize, n: usize) -> Result<usize> {
    let mut flat = 0usize;
    for i in 0..n {
        let t = ((x[i] - lo[i]) / h).round();
        if t < 0.0 || t > (per - 1) as f64 {
            return Err(Error::Parse("node outside inferred lattice".into()));
        }
        flat = flat * per + t as usize;
    }
    Ok(flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corner_map() -> SampledMap {
        let grid = Grid::new(vec![-1.0], 2.0).unwrap();
        sample_map(&MapSpec::Corner { corner: 0.0 }, &grid, 8, 8).unwrap()
    }

    #[test]
    fn closed_form_evaluations() {
        let corner = MapSpec::Corner { corner: 0.0 };
        assert_eq!(corner.eval(&[-0.5]), Point::Vector(vec![0.5]));
        let affine = MapSpec::Affine { matrix: vec![vec![2.0]] };
        assert_eq!(affine.eval(&[0.3]), Point::Vector(vec![0.6]));
        let dc = MapSpec::DistanceCoords {
            sites: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        };
        assert_eq!(dc.eval(&[0.0, 0.0]), Point::Vector(vec![0.0, 1.0]));
    }

    #[test]
    fn corner_sampling_estimates_unit_slope() {
        let map = corner_map();
        assert!((map.l_hat() - 1.0).abs() < 1e-9, "l_hat = {}", map.l_hat());
        assert!(map.l_hat() <= 1.0 + 1e-9);
    }

    #[test]
    fn constant_affine_map_has_zero_slope() {
        let grid = Grid::unit(1);
        let map = sample_map(&MapSpec::Affine { matrix: vec![vec![0.0]] }, &grid, 6, 7).unwrap();
        assert_eq!(map.l_hat(), 0.0);
    }

    #[test]
    fn affine_slope_recovered_exactly() {
        let grid = Grid::unit(1);
        let map = sample_map(&MapSpec::Affine { matrix: vec![vec![2.0]] }, &grid, 8, 7).unwrap();
        assert!((map.l_hat() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sawtooth_l_hat_within_five_percent_of_closed_form() {
        let spec = MapSpec::sawtooth_default(3);
        let grid = Grid::unit(1);
        let map = sample_map(&spec, &grid, 11, 7).unwrap();
        let l = spec.lipschitz_bound();
        // slopes 1 + 1/6 + 1/36, all aligned near t = 0+
        assert!((l - (1.0 + 1.0 / 6.0 + 1.0 / 36.0)).abs() < 1e-12);
        assert!(map.l_hat() <= l * (1.0 + 1e-9));
        assert!((map.l_hat() - l).abs() / l < 0.05, "l_hat {}", map.l_hat());
    }

    #[test]
    fn all_families_respect_their_lipschitz_bound() {
        use rand::Rng;
        let specs: Vec<(MapSpec, Grid)> = vec![
            (MapSpec::Corner { corner: 0.0 }, Grid::new(vec![-1.0], 2.0).unwrap()),
            (MapSpec::sawtooth_default(4), Grid::unit(1)),
            (
                MapSpec::Affine { matrix: vec![vec![1.0, 0.3], vec![-0.2, 1.0]] },
                Grid::unit(2),
            ),
            (
                MapSpec::NormPullback { gauge: PolyhedralSeminorm::l1(2) },
                Grid::unit(2),
            ),
            (
                MapSpec::DistanceCoords { sites: vec![vec![0.2, 0.4], vec![0.9, 0.1]] },
                Grid::unit(2),
            ),
            (
                MapSpec::BrokenCurve {
                    vertices: vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.2, 1.0]],
                    t_lo: 0.0,
                    t_hi: 1.0,
                },
                Grid::unit(1),
            ),
        ];
        let mut rng = crate::rng::stream(17, &[3]);
        for (spec, grid) in specs {
            let map = sample_map(&spec, &grid, default_resolution(grid.n()), 7).unwrap();
            let l = spec.lipschitz_bound();
            assert!(map.l_hat() <= l * (1.0 + 1e-9), "{}", spec.family());
            let lo = map.domain_lo();
            let hi = map.domain_hi();
            for _ in 0..2000 {
                let x: Vec<f64> = (0..grid.n())
                    .map(|i| rng.gen_range(lo[i]..hi[i]))
                    .collect();
                let y: Vec<f64> = (0..grid.n())
                    .map(|i| rng.gen_range(lo[i]..hi[i]))
                    .collect();
                let d = map.dist(&x, &y).unwrap();
                assert!(
                    d <= l * geom::dist2(&x, &y) * (1.0 + 1e-9) + 1e-12,
                    "{} violates its bound",
                    spec.family()
                );
            }
        }
    }

    #[test]
    fn lift_of_constant_map_is_domain_distance() {
        let grid = Grid::unit(1);
        let map = sample_map(&MapSpec::Affine { matrix: vec![vec![0.0]] }, &grid, 6, 7).unwrap();
        let lifted = lift_map(&map);
        for (x, y) in [(0.1, 0.7), (0.0, 1.0), (0.25, 0.3)] {
            let d = lifted.dist(&[x], &[y]).unwrap();
            assert!((d - (x - y).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn lifted_corner_symmetric_pair() {
        let map = corner_map();
        let lifted = lift_map(&map);
        let a = 0.4;
        let d = lifted.dist(&[-a], &[a]).unwrap();
        assert!((d - 2.0 * a).abs() < 1e-12);
        assert!(lifted.l_hat() <= (1.0 + map.l_hat() * map.l_hat()).sqrt() + 1e-9);
    }

    #[test]
    fn lift_projection_identity() {
        let grid = Grid::unit(2);
        let spec = MapSpec::DistanceCoords {
            sites: vec![vec![0.2, 0.4], vec![0.9, 0.1]],
        };
        let map = sample_map(&spec, &grid, 5, 7).unwrap();
        let lifted = lift_map(&map);
        let mut rng = crate::rng::stream(23, &[5]);
        use rand::Rng;
        for _ in 0..500 {
            let x = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let y = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let dl = lifted.dist(&x, &y).unwrap();
            let d = map.dist(&x, &y).unwrap();
            let dx = geom::dist2(&x, &y);
            let lhs = dl * dl - dx * dx;
            assert!((lhs - d * d).abs() <= 1e-9 * (1.0 + d * d));
        }
    }

    #[test]
    fn csv_round_trip_reproduces_distances() {
        let grid = Grid::unit(1);
        let spec = MapSpec::Corner { corner: 0.5 };
        let map = sample_map(&spec, &grid, 5, 3).unwrap();
        let dir = std::env::temp_dir().join("metricdiff-test-csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("map.csv");
        emit_map_csv(&map, &path).unwrap();
        let raw = ingest_map_csv(&path, 1, 3, None).unwrap();
        assert!(!raw.is_closed_form());
        assert!((raw.grid().side() - 1.0).abs() < 1e-9);
        for (x, y) in [(0.1, 0.9), (0.25, 0.5), (-0.2, 1.1)] {
            let want = map.dist(&[x], &[y]).unwrap();
            let got = raw.dist(&[x], &[y]).unwrap();
            assert!((want - got).abs() < 2.0 * map.step(), "{want} vs {got}");
        }
        assert!(raw.l_hat() <= 1.0 + 1e-9);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn matrix_valued_csv_ingestion() {
        use crate::metricspace::DistanceMatrix;
        // 5 nodes on [0,1] (margin 1, resolution 2), cycling point indices
        let dir = std::env::temp_dir().join("metricdiff-test-csv-matrix");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("map.csv");
        std::fs::write(&path, "0.0,0\n0.25,1\n0.5,2\n0.75,1\n1.0,0\n").unwrap();
        let m = DistanceMatrix::from_upper_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        let raw = ingest_map_csv(&path, 1, 1, Some(m)).unwrap();
        assert!((raw.dist(&[0.0], &[0.5]).unwrap() - 2.0).abs() < 1e-12);
        assert!((raw.dist(&[0.25], &[0.75]).unwrap() - 0.0).abs() < 1e-12);
        // nearest-node evaluation snaps 0.1 to node 0 and 0.6 to node 0.5
        assert!((raw.dist(&[0.1], &[0.6]).unwrap() - 2.0).abs() < 1e-12);
        assert!(raw.l_hat() > 0.0);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn raw_map_out_of_domain_errors() {
        let grid = Grid::unit(1);
        let map = sample_map(&MapSpec::Corner { corner: 0.5 }, &grid, 5, 3).unwrap();
        let dir = std::env::temp_dir().join("metricdiff-test-csv2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("map.csv");
        emit_map_csv(&map, &path).unwrap();
        let raw = ingest_map_csv(&path, 1, 3, None).unwrap();
        assert!(matches!(raw.eval(&[9.0]), Err(Error::OutOfDomain)));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn margin_covers_ancestor_dilations() {
        assert_eq!(margin_for(0), 7);
        assert_eq!(margin_for(2), 12);
        assert_eq!(margin_for(3), 24);
    }
}
