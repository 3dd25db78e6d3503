//! Alternating minimax seminorm fitting.
//!
//! Each pair (displacement w, target distance d) should satisfy
//! max_k |<a_k, w>| ~ d. The fit alternates between assigning every pair to
//! its achieving functional and re-solving each functional as a Chebyshev
//! (sup-residual) linear regression with the signs frozen from the previous
//! iterate. Accepted iterations never increase the sup residual; the best
//! candidate over all starts wins.

use super::simplex::{solve_min, LpOutcome};
use super::{AnalysisParams, PolyhedralSeminorm};
use crate::error::{Error, Result};
use crate::geom;
use crate::rng;

/// Minimax linear regression: minimizes max_i |<a, x_i> - d_i| over a.
/// Solved through the dual program (n+1 rows, 2*rows columns); the primal
/// coefficients are the dual prices of the row constraints.
pub(crate) fn chebyshev_fit(rows: &[(Vec<f64>, f64)]) -> Option<(Vec<f64>, f64)> {
    let p = rows.len();
    if p == 0 {
        return None;
    }
    let n = rows[0].0.len();
    // min sum d_i u_i - sum d_i v_i
    // s.t. sum (u_i - v_i) x_i = 0, sum (u_i + v_i) = 1, u, v >= 0
    let mut c = Vec::with_capacity(2 * p);
    for (_, d) in rows {
        c.push(*d);
    }
    for (_, d) in rows {
        c.push(-*d);
    }
    let mut a_rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for r in 0..n {
        let mut row = Vec::with_capacity(2 * p);
        for (x, _) in rows {
            row.push(x[r]);
        }
        for (x, _) in rows {
            row.push(-x[r]);
        }
        a_rows.push(row);
    }
    a_rows.push(vec![1.0; 2 * p]);
    let mut b = vec![0.0; n];
    b.push(1.0);
    match solve_min(&c, &a_rows, &b) {
        LpOutcome::Optimal(res) => {
            let a: Vec<f64> = res.dual[..n].to_vec();
            let t = -res.objective;
            // certificate: the recovered coefficients must achieve the
            // duality value; otherwise fall back to rejecting the fit
            let achieved = rows
                .iter()
                .fold(0.0_f64, |m, (x, d)| m.max((geom::dot(&a, x) - d).abs()));
            if (achieved - t).abs() <= 1e-6 * (1.0 + t.abs()) {
                Some((a, t))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn objective(functionals: &[Vec<f64>], pairs: &[(Vec<f64>, f64)]) -> f64 {
    pairs.iter().fold(0.0, |m, (w, d)| {
        let v = functionals
            .iter()
            .fold(0.0_f64, |acc, a| acc.max(geom::dot(a, w).abs()));
        m.max((v - d).abs())
    })
}

/// Deterministic start: greedy pick of k pairs with large targets and
/// mutually distinct directions, each seeding a = d w / |w|^2.
fn data_start(pairs: &[(Vec<f64>, f64)], k: usize, n: usize) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| {
        pairs[j]
            .1
            .partial_cmp(&pairs[i].1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut picked: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(k);
    for &i in &order {
        if out.len() == k {
            break;
        }
        let (w, d) = &pairs[i];
        let len = geom::norm2(w);
        if len < 1e-12 {
            continue;
        }
        let u = geom::scale(w, 1.0 / len);
        if picked
            .iter()
            .any(|v: &Vec<f64>| geom::dot(v, &u).abs() > 0.97)
        {
            continue;
        }
        out.push(geom::scale(w, d / (len * len)));
        picked.push(u);
    }
    while out.len() < k {
        out.push(vec![0.0; n]);
    }
    out
}

fn one_start(
    pairs: &[(Vec<f64>, f64)],
    start: &[Vec<f64>],
    k: usize,
    rounds: usize,
) -> (Vec<Vec<f64>>, f64) {
    let mut current = start.to_vec();
    let mut best = current.clone();
    let mut best_obj = objective(&current, pairs);
    for _ in 0..rounds {
        // assignment: every pair goes to its achieving functional,
        // ties to the lowest index
        let mut groups: Vec<Vec<(Vec<f64>, f64)>> = vec![Vec::new(); k];
        let mut worst: Option<(f64, usize)> = None;
        for (idx, (w, d)) in pairs.iter().enumerate() {
            if geom::norm2(w) < 1e-12 {
                continue;
            }
            let mut kk = 0;
            let mut kv = f64::NEG_INFINITY;
            for (j, a) in current.iter().enumerate() {
                let v = geom::dot(a, w).abs();
                if v > kv + 1e-15 {
                    kv = v;
                    kk = j;
                }
            }
            let sign = if geom::dot(&current[kk], w) < 0.0 { -1.0 } else { 1.0 };
            groups[kk].push((geom::scale(w, sign), *d));
            let res = (kv - d).abs();
            if worst.is_none_or(|(r, _)| res > r) {
                worst = Some((res, idx));
            }
        }
        // refit each functional on its assigned pairs
        let mut next = current.clone();
        for j in 0..k {
            if groups[j].is_empty() {
                // re-seed a dead functional toward the worst residual pair
                if let Some((_, idx)) = worst {
                    let (w, d) = &pairs[idx];
                    let len2 = geom::dot(w, w);
                    if len2 > 1e-12 {
                        next[j] = geom::scale(w, d / len2);
                    }
                }
                continue;
            }
            if let Some((a, _)) = chebyshev_fit(&groups[j]) {
                next[j] = a;
            }
        }
        let obj = objective(&next, pairs);
        if obj < best_obj - 1e-15 {
            best_obj = obj;
            best = next.clone();
            current = next;
        } else {
            break;
        }
    }
    (best, best_obj)
}

/// Fits a polyhedral seminorm with `k` functionals to displacement/distance
/// pairs by alternating minimax. `starts` seeds extra multi-start attempts
/// (the constructive seminorm is the usual caller-provided start);
/// `seed_tag` keys the deterministic random starts.
pub fn fit_seminorm(
    pairs: &[(Vec<f64>, f64)],
    k: usize,
    starts: &[PolyhedralSeminorm],
    seed_tag: u64,
    p: &AnalysisParams,
) -> Result<PolyhedralSeminorm> {
    if pairs.is_empty() {
        return Err(Error::InsufficientPairs { need: 1, got: 0 });
    }
    let n = pairs[0].0.len();
    let need = k * (n + 1);
    if pairs.len() < need {
        return Err(Error::InsufficientPairs {
            need,
            got: pairs.len(),
        });
    }
    let scale = pairs.iter().fold(0.0_f64, |m, (_, d)| m.max(*d));
    if scale <= 1e-14 {
        return Ok(PolyhedralSeminorm::zero(n));
    }

    let mut candidates: Vec<Vec<Vec<f64>>> = Vec::new();
    for s in starts {
        let mut fs: Vec<Vec<f64>> = s.functionals().to_vec();
        fs.sort_by(|a, b| geom::norm2(b).total_cmp(&geom::norm2(a)));
        fs.truncate(k);
        let pad = data_start(pairs, k, n);
        while fs.len() < k {
            fs.push(pad[fs.len()].clone());
        }
        candidates.push(fs);
    }
    candidates.push(data_start(pairs, k, n));
    let mut rng = rng::stream(p.seed, &[seed_tag, 0x6669_74]);
    let typical = {
        let mut ratios: Vec<f64> = pairs
            .iter()
            .filter(|(w, _)| geom::norm2(w) > 1e-12)
            .map(|(w, d)| d / geom::norm2(w))
            .collect();
        ratios.sort_by(|a, b| a.total_cmp(b));
        ratios.get(ratios.len() / 2).copied().unwrap_or(1.0)
    };
    for _ in 0..p.fit_starts {
        let fs: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| geom::sample_normal(&mut rng)).collect();
                let len = geom::norm2(&v).max(1e-9);
                geom::scale(&v, typical / len)
            })
            .collect();
        candidates.push(fs);
    }

    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    for start in &candidates {
        let (fs, obj) = one_start(pairs, start, k, p.fit_rounds);
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((fs, obj));
        }
    }
    let (functionals, _) = best.expect("at least one start");
    let kept: Vec<Vec<f64>> = functionals
        .into_iter()
        .filter(|a| geom::norm2(a) > 1e-12)
        .collect();
    PolyhedralSeminorm::new(n, kept)
}
