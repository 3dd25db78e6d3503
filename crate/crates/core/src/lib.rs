//! Multiscale analysis of Lipschitz maps from Euclidean cubes into metric
//! spaces: dyadic cube bookkeeping, pluggable metric backends, synthetic
//! map families, metric-defect beta numbers, homogeneity ratios and fitted
//! seminorms, md deviation estimates, and packing reports that probe
//! Carleson-type stability at desk scale.
//!
//! The per-cube loops fan out over a rayon pool when the default
//! `parallel` feature is on; per-cube RNG streams derive from (seed, cube
//! key), so results are byte-identical across worker counts and with the
//! sequential fallback.

pub mod beta;
pub mod carleson;
pub mod corpus;
pub mod dyadic;
pub mod error;
pub mod exec;
pub mod geom;
pub mod metricspace;
pub mod report;
pub mod rng;
pub mod seminorm;

pub use error::{Error, Result};
