//! Dense primal simplex for `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible at the start, so no phase one is needed. The
//! result is always a basic feasible solution: at most `rows` variables
//! (structural or slack) are nonzero.
//!
//! Entering variables follow the most-negative reduced cost until a run of
//! degenerate pivots is seen, after which Bland's rule takes over for the rest
//! of the solve and guarantees termination.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
const DEGENERATE_RUN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    /// Structural variables.
    pub x: Vec<f64>,
    /// Slack of each row.
    pub slack: Vec<f64>,
    /// Basic variable per row: `< n` structural, otherwise slack `n + row`.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m {
        return Err(Error::Structure(format!("{m} rows but {} right-hand sides", b.len())));
    }
    if let Some(r) = a.iter().position(|row| row.len() != n) {
        return Err(Error::Structure(format!("row {r} has wrong width")));
    }
    if let Some(r) = b.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Structure(format!("rhs of row {r} must be finite and nonnegative")));
    }
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for r in 0..m {
        let row = &mut t[r * width..(r + 1) * width];
        row[..n].copy_from_slice(&a[r]);
        row[n + r] = 1.0;
        row[width - 1] = b[r];
    }
    {
        let obj = &mut t[m * width..];
        for j in 0..n {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;
    let mut bland = false;
    let mut degenerate = 0;
    let status = loop {
        let obj = &t[m * width..(m + 1) * width - 1];
        let entering = if bland {
            obj.iter().position(|&z| z < -EPS)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (j, &z) in obj.iter().enumerate() {
                if z < -EPS && best.is_none_or(|(_, bz)| z < bz) {
                    best = Some((j, z));
                }
            }
            best.map(|(j, _)| j)
        };
        let Some(col) = entering else { break LpStatus::Optimal };

        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t[r * width + col];
            if coef > EPS {
                let ratio = t[r * width + width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - EPS || (ratio <= lratio + EPS && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else { break LpStatus::Unbounded };

        if ratio <= EPS {
            degenerate += 1;
            if degenerate >= DEGENERATE_RUN {
                bland = true;
            }
        } else {
            degenerate = 0;
        }
        pivot(&mut t, width, m, row, col);
        basis[row] = col;
        pivots += 1;
    };

    let mut x = vec![0.0; n];
    let mut slack = vec![0.0; m];
    for (r, &v) in basis.iter().enumerate() {
        let val = t[r * width + width - 1].max(0.0);
        if v < n {
            x[v] = val;
        } else {
            slack[v - n] = val;
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { status, value, x, slack, basis, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for r in 0..=m {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f == 0.0 {
            continue;
        }
        let dst = &mut t[r * width..(r + 1) * width];
        for (d, s) in dst.iter_mut().zip(&pivot_row) {
            *d -= f * s;
        }
        dst[col] = 0.0;
    }
}
