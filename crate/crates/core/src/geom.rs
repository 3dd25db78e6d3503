//! Small dense-vector helpers, low-discrepancy sequences, and line geometry.

use rand::Rng;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Euclidean norm.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm2(a);
    assert!(n > 0.0, "cannot normalize the zero vector");
    scale(a, 1.0 / n)
}

/// Radical-inverse of `i` in the given base (van der Corput / Halton).
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// i-th Halton point of dimension `n` in the unit cube.
pub fn halton_point(i: u64, n: usize) -> Vec<f64> {
    assert!(n <= HALTON_BASES.len());
    (0..n)
        .map(|d| radical_inverse(i + 1, HALTON_BASES[d]))
        .collect()
}

/// Standard normal via Box-Muller; two uniforms per sample, deterministic
/// given the rng state.
pub fn sample_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform direction on the hemisphere with nonnegative last coordinate
/// (antipodal representatives; line directions double-cover the sphere).
pub fn sample_hemisphere_dir<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| sample_normal(rng)).collect();
        let len = norm2(&v);
        if len > 1e-12 {
            let mut u = scale(&v, 1.0 / len);
            if u[n - 1] < 0.0 {
                u = scale(&u, -1.0);
            }
            return u;
        }
    }
}

/// Deterministic antipodally-reduced direction set: `pairs` representatives,
/// one per line through the origin.
pub fn direction_pairs(n: usize, pairs: usize) -> Vec<Vec<f64>> {
    assert!(pairs >= 1);
    match n {
        1 => vec![vec![1.0]],
        2 => (0..pairs)
            .map(|k| {
                let theta = std::f64::consts::PI * k as f64 / pairs as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect(),
        _ => {
            // Golden-spiral points on the upper hemisphere.
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            (0..pairs)
                .map(|k| {
                    let z = (k as f64 + 0.5) / pairs as f64; // (0,1]
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = std::f64::consts::TAU * (k as f64 / golden).fract();
                    let mut v = vec![0.0; n];
                    v[0] = r * phi.cos();
                    v[1] = r * phi.sin();
                    v[n - 1] = z;
                    normalize(&v)
                })
                .collect()
        }
    }
}

/// Orthonormal basis of the hyperplane orthogonal to unit vector `u`,
/// built by Gram-Schmidt over the standard basis. Deterministic.
pub fn orthogonal_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for (ek, bk) in e.iter_mut().zip(b) {
                *ek -= c * bk;
            }
        }
        let len = norm2(&e);
        if len > 1e-9 {
            basis.push(scale(&e, 1.0 / len));
        }
    }
    assert_eq!(basis.len(), n, "Gram-Schmidt failed to complete a basis");
    basis.remove(0);
    basis
}

/// Clips the line `p(t) = origin + t * dir` (unit `dir`) against the axis
/// box `[lo, hi]`; returns the chord parameter interval when nonempty.
pub fn clip_line_to_box(origin: &[f64], dir: &[f64], lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for i in 0..origin.len() {
        if dir[i].abs() < 1e-15 {
            if origin[i] < lo[i] || origin[i] > hi[i] {
                return None;
            }
        } else {
            let a = (lo[i] - origin[i]) / dir[i];
            let b = (hi[i] - origin[i]) / dir[i];
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
    }
    if t0 < t1 {
        Some((t0, t1))
    } else {
        None
    }
}
