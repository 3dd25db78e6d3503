//! Seminorms on R^n and everything that produces them: homogeneity ratios
//! along lines, star profiles and their convex-hull gauges, Caratheodory
//! memberships, alternating minimax fits, and the md deviation estimates.

mod fit;
mod hull;
mod md;
mod sigma;
mod simplex;

pub use fit::fit_seminorm;
pub use hull::{caratheodory_membership, gauge_of_hull, GaugeEval};
pub use md::{md_estimate, md_exact_1d, MdEstimate, MdExact, MdRegion};
pub use sigma::{
    build_star_profile, construct_seminorm, seminorm_from_profile, sigma, sigma_ray,
};

use crate::error::{Error, Result};
use crate::geom;
use serde::{Deserialize, Serialize};

/// Max of |linear functionals|: value(x) = max_k |<a_k, x>|.
///
/// Closed under the fitting step, dense in all seminorms, and exactly the
/// gauge of a symmetric polytope. An empty functional list is the zero
/// seminorm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralSeminorm {
    dim: usize,
    functionals: Vec<Vec<f64>>,
}

impl PolyhedralSeminorm {
    pub fn new(dim: usize, functionals: Vec<Vec<f64>>) -> Result<Self> {
        if functionals.iter().any(|a| a.len() != dim) {
            return Err(Error::Config(
                "every functional must have the seminorm's dimension".into(),
            ));
        }
        Ok(PolyhedralSeminorm { dim, functionals })
    }

    pub fn zero(dim: usize) -> Self {
        PolyhedralSeminorm {
            dim,
            functionals: Vec::new(),
        }
    }

    /// The l1 norm as max over sign patterns (2^(n-1) functionals).
    pub fn l1(dim: usize) -> Self {
        assert!((1..=16).contains(&dim));
        let mut functionals = Vec::with_capacity(1 << (dim - 1));
        for mask in 0..(1u64 << (dim - 1)) {
            let mut a = vec![1.0; dim];
            for (i, ai) in a.iter_mut().enumerate().skip(1) {
                if (mask >> (i - 1)) & 1 == 1 {
                    *ai = -1.0;
                }
            }
            functionals.push(a);
        }
        PolyhedralSeminorm { dim, functionals }
    }

    /// The sup norm: coordinate functionals.
    pub fn linf(dim: usize) -> Self {
        let functionals = (0..dim)
            .map(|i| {
                let mut a = vec![0.0; dim];
                a[i] = 1.0;
                a
            })
            .collect();
        PolyhedralSeminorm { dim, functionals }
    }

    /// Scaled coordinate seminorm max_i |x_i / w_i| with infinite weights
    /// dropping the coordinate.
    pub fn weighted_max(weights: &[f64]) -> Self {
        let dim = weights.len();
        let functionals = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_finite() && **w != 0.0)
            .map(|(i, w)| {
                let mut a = vec![0.0; dim];
                a[i] = 1.0 / w;
                a
            })
            .collect();
        PolyhedralSeminorm { dim, functionals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functionals(&self) -> &[Vec<f64>] {
        &self.functionals
    }

    pub fn is_zero(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.functionals
            .iter()
            .fold(0.0, |m, a| m.max(geom::dot(a, x).abs()))
    }

    /// Largest value over the Euclidean unit sphere: max_k |a_k|_2.
    pub fn operator_bound(&self) -> f64 {
        self.functionals
            .iter()
            .fold(0.0, |m, a| m.max(geom::norm2(a)))
    }
}

/// Per-direction radii of the star body {sigma(x)·|x| <= 1}: one entry per
/// antipodal direction pair; `None` marks a degenerate (sigma ~ 0)
/// direction, i.e. a recession direction of the hull.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarProfile {
    pub directions: Vec<Vec<f64>>,
    pub radii: Vec<Option<f64>>,
}

impl StarProfile {
    pub fn new(directions: Vec<Vec<f64>>, radii: Vec<Option<f64>>) -> Result<Self> {
        if directions.len() != radii.len() || directions.is_empty() {
            return Err(Error::Config("profile needs one radius per direction".into()));
        }
        if radii.iter().any(|r| matches!(r, Some(v) if !(*v > 0.0))) {
            return Err(Error::Config("finite radii must be positive".into()));
        }
        Ok(StarProfile { directions, radii })
    }

    pub fn dim(&self) -> usize {
        self.directions[0].len()
    }

    /// Hull generators ±r·u over the finite radii.
    pub fn hull_points(&self) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for (u, r) in self.directions.iter().zip(&self.radii) {
            if let Some(r) = r {
                pts.push(geom::scale(u, *r));
                pts.push(geom::scale(u, -*r));
            }
        }
        pts
    }

    /// Recession directions (one representative per antipodal pair).
    pub fn recession_dirs(&self) -> Vec<Vec<f64>> {
        self.directions
            .iter()
            .zip(&self.radii)
            .filter(|(_, r)| r.is_none())
            .map(|(u, _)| u.clone())
            .collect()
    }

    pub fn is_empty_body(&self) -> bool {
        self.radii.iter().all(|r| r.is_none())
    }
}

/// Tunables of the multiscale analysis.
///
/// The separation fraction `alpha` obeys
/// `sqrt(n)·alpha'/(1-alpha') + (2+sqrt(n))·alpha < delta` with
/// `alpha' = 2(n+1)·alpha`; `auto` picks the largest such alpha for the
/// target `delta`. The thresholds `eps_prime` and `rho` of the shift
/// inequalities are tied to `alpha`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub n: usize,
    /// Homogeneity separation fraction in (0,1).
    pub alpha: f64,
    /// Ancestor depth N: ratios are taken inside 3Q^N.
    pub ancestor_levels: u32,
    /// md threshold the alpha inequality is calibrated against.
    pub delta: f64,
    /// beta threshold used when classifying cubes in the beta/md table.
    pub beta_eps: f64,
    /// sigma values below `sigma_floor_rel * L` count as degenerate.
    pub sigma_floor_rel: f64,
    /// Antipodal direction pairs in a star profile.
    pub directions: usize,
    /// Equispaced chord points the ratio infimum is taken over.
    pub chord_points: usize,
    /// Low-discrepancy displacement pairs per md evaluation.
    pub pair_count: usize,
    /// Functionals K in a fitted seminorm.
    pub fit_functionals: usize,
    /// Alternating-fit rounds per start.
    pub fit_rounds: usize,
    /// Random fit starts in addition to deterministic ones.
    pub fit_starts: usize,
    pub seed: u64,
}

impl AnalysisParams {
    /// Defaults for dimension `n` with auto-derived alpha at delta = 0.25.
    pub fn auto(n: usize) -> Self {
        Self::auto_for_delta(n, 0.25)
    }

    /// Largest alpha satisfying the separation inequality for `delta`.
    pub fn auto_for_delta(n: usize, delta: f64) -> Self {
        let alpha = auto_alpha(n, delta);
        AnalysisParams {
            n,
            alpha,
            ancestor_levels: 2,
            delta,
            beta_eps: 1e-3,
            sigma_floor_rel: 1e-3,
            directions: if n == 1 { 1 } else { 32 },
            chord_points: 128,
            pair_count: 512,
            fit_functionals: 2 * n,
            fit_rounds: 12,
            fit_starts: 2,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn alpha_prime(&self) -> f64 {
        2.0 * (self.n as f64 + 1.0) * self.alpha
    }

    /// Left side of the separation inequality; must stay below delta.
    pub fn separation_margin(&self) -> f64 {
        let rn = (self.n as f64).sqrt();
        let ap = self.alpha_prime();
        rn * ap / (1.0 - ap) + (2.0 + rn) * self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must lie in (0,1)".into()));
        }
        if self.alpha_prime() >= 1.0 {
            return Err(Error::Config("alpha' = 2(n+1)alpha must stay below 1".into()));
        }
        if self.separation_margin() >= self.delta {
            return Err(Error::Config(format!(
                "alpha {} violates the separation inequality for delta {}",
                self.alpha, self.delta
            )));
        }
        if self.directions < 1 || self.chord_points < 8 || self.pair_count < 8 {
            return Err(Error::Config("analysis resolution too small".into()));
        }
        if self.fit_functionals < 1 {
            return Err(Error::Config("need at least one fit functional".into()));
        }
        Ok(())
    }
}

/// Largest alpha with sqrt(n)·a'/(1-a') + (2+sqrt(n))·a < delta, found by
/// bisection and backed off slightly to keep the inequality strict.
pub fn auto_alpha(n: usize, delta: f64) -> f64 {
    assert!(delta > 0.0);
    let nf = n as f64;
    let margin = |a: f64| {
        let ap = 2.0 * (nf + 1.0) * a;
        nf.sqrt() * ap / (1.0 - ap) + (2.0 + nf.sqrt()) * a
    };
    let mut lo = 0.0;
    let mut hi = 0.999 / (2.0 * (nf + 1.0));
    if margin(hi) < delta {
        return hi * 0.999;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) < delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo * 0.999
}
