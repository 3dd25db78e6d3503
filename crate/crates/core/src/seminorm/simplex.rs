//! Dense two-phase simplex for the small equality-form programs used by the
//! gauge, membership, and Chebyshev-fit routines: min c'x, Ax = b, x >= 0.
//!
//! Row counts stay tiny (at most n+2 for the Chebyshev dual), column counts
//! reach a few thousand, so a recomputed-reduced-cost tableau with Bland's
//! rule is fast enough and cannot cycle.

const TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual prices of the equality rows (c_B * B^-1).
    pub dual: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(SimplexResult),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural + artificial
    t: Vec<f64>, // rows x (cols + 1), last column is rhs
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.cols + 1;
        let p = self.t[row * w + col];
        debug_assert!(p.abs() > TOL);
        let inv = 1.0 / p;
        for j in 0..w {
            self.t[row * w + j] *= inv;
        }
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let f = self.t[r * w + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[r * w + j] -= f * self.t[row * w + j];
            }
        }
        self.basis[row] = col;
    }

    /// Bland-rule phase over the given cost vector; columns failing `allow`
    /// never enter. Returns false on an unbounded ray.
    fn run(&mut self, cost: &[f64], allow: &dyn Fn(usize) -> bool) -> bool {
        loop {
            // reduced costs r_j = c_j - y' A_j with y' = c_B B^-1 applied via
            // the current tableau rows
            let mut entering = None;
            for j in 0..self.cols {
                if !allow(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut rj = cost[j];
                for (i, &bi) in self.basis.iter().enumerate() {
                    let cb = cost[bi];
                    if cb != 0.0 {
                        rj -= cb * self.at(i, j);
                    }
                }
                if rj < -TOL {
                    entering = Some(j);
                    break; // Bland: smallest index
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a > TOL {
                    let ratio = self.rhs(r) / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - TOL
                                || (ratio < lratio + TOL && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, col);
        }
    }
}

/// Minimizes c'x subject to Ax = b, x >= 0.
pub fn solve_min(c: &[f64], a_rows: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a_rows.len();
    let n = c.len();
    debug_assert!(a_rows.iter().all(|r| r.len() == n));
    debug_assert_eq!(b.len(), m);

    let cols = n + m;
    let w = cols + 1;
    let mut t = vec![0.0; m * w];
    for (i, row) in a_rows.iter().enumerate() {
        let neg = b[i] < 0.0;
        for (j, &v) in row.iter().enumerate() {
            t[i * w + j] = if neg { -v } else { v };
        }
        t[i * w + n + i] = 1.0;
        t[i * w + cols] = b[i].abs();
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        basis: (n..n + m).collect(),
    };

    // Phase 1: minimize artificial mass.
    let mut phase1 = vec![0.0; cols];
    for j in n..cols {
        phase1[j] = 1.0;
    }
    if !tab.run(&phase1, &|_| true) {
        return LpOutcome::Unbounded; // cannot happen: phase 1 is bounded below
    }
    let infeas: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bi)| bi >= n)
        .map(|(i, _)| tab.rhs(i))
        .sum();
    if infeas > 1e-7 {
        return LpOutcome::Infeasible;
    }
    // Drive leftover artificials out of the basis where the row is not
    // redundant.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| tab.at(r, j).abs() > TOL) {
                tab.pivot(r, j);
            }
        }
    }

    // Phase 2 on the original costs; artificials may not re-enter.
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(c);
    if !tab.run(&phase2, &|j| j < n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for (i, &bi) in tab.basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab.rhs(i);
        }
    }
    let objective: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();

    // Dual prices from B' y = c_B on the original columns (artificial basis
    // entries behave as unit columns with zero cost).
    let mut bt = vec![0.0; m * m];
    let mut cb = vec![0.0; m];
    for (i, &bi) in tab.basis.iter().enumerate() {
        for r in 0..m {
            let v = if bi < n {
                let neg = b[r] < 0.0;
                let raw = a_rows[r][bi];
                if neg {
                    -raw
                } else {
                    raw
                }
            } else if bi - n == r {
                1.0
            } else {
                0.0
            };
            bt[i * m + r] = v; // row i of B^T = column basis[i] of A
        }
        cb[i] = if bi < n { c[bi] } else { 0.0 };
    }
    let mut dual = solve_dense(&mut bt, &mut cb, m);
    // Undo the row negations applied when forcing b >= 0.
    for (r, &bi) in b.iter().enumerate() {
        if bi < 0.0 {
            dual[r] = -dual[r];
        }
    }

    LpOutcome::Optimal(SimplexResult { x, objective, dual })
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
/// Singular systems return a least-effort solution with zeros in the
/// dependent coordinates (redundant rows carry free duals).
fn solve_dense(a: &mut [f64], rhs: &mut [f64], m: usize) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..m).collect();
    for col in 0..m {
        let mut best = col;
        for r in col + 1..m {
            if a[perm[r] * m + col].abs() > a[perm[best] * m + col].abs() {
                best = r;
            }
        }
        perm.swap(col, best);
        let p = a[perm[col] * m + col];
        if p.abs() < 1e-12 {
            continue;
        }
        for r in col + 1..m {
            let f = a[perm[r] * m + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..m {
                a[perm[r] * m + j] -= f * a[perm[col] * m + j];
            }
            rhs[perm[r]] -= f * rhs[perm[col]];
        }
    }
    let mut x = vec![0.0; m];
    for col in (0..m).rev() {
        let p = a[perm[col] * m + col];
        if p.abs() < 1e-12 {
            x[col] = 0.0;
            continue;
        }
        let mut acc = rhs[perm[col]];
        for j in col + 1..m {
            acc -= a[perm[col] * m + j] * x[j];
        }
        x[col] = acc / p;
    }
    x
}
