//! Metric backends for the target space: sup-norm vectors, explicit
//! distance matrices, normed planes, and the lifted product metric
//! sqrt(|du|_2^2 + d(v,v')^2) used by the graph map x -> (x, f(x)).

use crate::error::{Error, Result};
use crate::geom;
use crate::seminorm::PolyhedralSeminorm;
use std::path::Path;

/// Pluggable distance structure of the target space.
#[derive(Clone, Debug)]
pub enum MetricBackend {
    /// R^dim with the sup norm.
    SupNorm { dim: usize },
    /// Finite metric space given by an explicit matrix; points are indices.
    Matrix(DistanceMatrix),
    /// R^n with a polyhedral norm: d(x,y) = gauge(x-y).
    NormedPlane { gauge: PolyhedralSeminorm },
    /// Product of the Euclidean domain with an inner target space.
    Lifted(Box<MetricBackend>),
}

/// A point tagged for its backend.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Vector(Vec<f64>),
    Index(usize),
    Lifted { base: Vec<f64>, fiber: Box<Point> },
}

impl MetricBackend {
    pub fn lifted(inner: MetricBackend) -> Self {
        MetricBackend::Lifted(Box::new(inner))
    }
}

/// Distance between two points of the same backend.
pub fn distance(backend: &MetricBackend, p: &Point, q: &Point) -> Result<f64> {
    match (backend, p, q) {
        (MetricBackend::SupNorm { dim }, Point::Vector(a), Point::Vector(b)) => {
            if a.len() != *dim || b.len() != *dim {
                return Err(Error::BackendMismatch);
            }
            Ok(a.iter()
                .zip(b)
                .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
        }
        (MetricBackend::Matrix(m), Point::Index(i), Point::Index(j)) => m.get(*i, *j),
        (MetricBackend::NormedPlane { gauge }, Point::Vector(a), Point::Vector(b)) => {
            if a.len() != gauge.dim() || b.len() != gauge.dim() {
                return Err(Error::BackendMismatch);
            }
            Ok(gauge.value(&geom::sub(a, b)))
        }
        (
            MetricBackend::Lifted(inner),
            Point::Lifted { base: u1, fiber: v1 },
            Point::Lifted { base: u2, fiber: v2 },
        ) => {
            let du = geom::dist2(u1, u2);
            let dv = distance(inner, v1, v2)?;
            Ok((du * du + dv * dv).sqrt())
        }
        _ => Err(Error::BackendMismatch),
    }
}

/// Symmetric nonnegative matrix with zero diagonal satisfying the triangle
/// inequality; validated on construction.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::Parse("distance matrix size mismatch".into()));
        }
        let m = DistanceMatrix { size, data };
        m.validate()?;
        Ok(m)
    }

    /// Builds from the upper triangle (row-major, i < j).
    pub fn from_upper_triangle(size: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != size * (size - 1) / 2 {
            return Err(Error::Parse("upper triangle length mismatch".into()));
        }
        let mut data = vec![0.0; size * size];
        let mut k = 0;
        for i in 0..size {
            for j in (i + 1)..size {
                data[i * size + j] = upper[k];
                data[j * size + i] = upper[k];
                k += 1;
            }
        }
        DistanceMatrix::new(size, data)
    }

    /// Plain-text format: first line the size, then the upper triangle,
    /// whitespace-separated.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut tokens = text.split_whitespace();
        let size: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty distance matrix file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad size: {e}")))?;
        let upper: Vec<f64> = tokens
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad entry: {e}"))))
            .collect::<Result<_>>()?;
        DistanceMatrix::from_upper_triangle(size, &upper)
    }

    fn validate(&self) -> Result<()> {
        let n = self.size;
        for i in 0..n {
            if self.data[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric {
                    i,
                    j: i,
                    k: i,
                    violation: self.data[i * n + i],
                });
            }
            for j in 0..n {
                let d = self.data[i * n + j];
                if !(d >= 0.0) || (self.data[j * n + i] - d).abs() > 1e-12 * (1.0 + d) {
                    return Err(Error::InvalidMetric {
                        i,
                        j,
                        k: j,
                        violation: self.data[j * n + i] - d,
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let violation =
                        self.data[i * n + k] - self.data[i * n + j] - self.data[j * n + k];
                    if violation > 1e-9 {
                        return Err(Error::InvalidMetric { i, j, k, violation });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.size || j >= self.size {
            return Err(Error::BackendMismatch);
        }
        Ok(self.data[i * self.size + j])
    }
}

/// Isometric embedding of a finite metric space into sup-norm vectors via
/// distance coordinates p_i = (D(i,k) - D(0,k))_k; exact on the input set.
pub fn kuratowski_embed(m: &DistanceMatrix) -> (MetricBackend, Vec<Point>) {
    let n = m.size();
    let points = (0..n)
        .map(|i| {
            Point::Vector(
                (0..n)
                    .map(|k| m.data[i * n + k] - m.data[k]) // D(i,k) - D(0,k)
                    .collect(),
            )
        })
        .collect();
    (MetricBackend::SupNorm { dim: n }, points)
}
