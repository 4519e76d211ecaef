use super::{best_single_rb, prune_zero_rates};
use crate::alloc::waterfill;
use crate::error::{Error, Result};
use crate::lp::{self, LpStatus};
use crate::model::{Assignment, SingleCellInstance, SolveResult};

/// Values within this distance of 0 or 1 are snapped.
const SNAP: f64 = 1e-9;

/// Optimal vertex of the LP relaxation
/// `max Σ w_j γ_jk x_jk  s.t.  Σ_j x_jk ≤ 1,  Σ γ_jk x_jk ≤ C,  x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub users: usize,
    pub rb_count: usize,
    /// `x[j * rb_count + k]`.
    pub x: Vec<f64>,
    pub lp_value: f64,
    /// RBs with some `0 < x_jk < 1`.
    pub fractional_rbs: Vec<usize>,
    pub pivots: usize,
}

impl FractionalSolution {
    pub fn x(&self, j: usize, k: usize) -> f64 {
        self.x[j * self.rb_count + k]
    }
}

/// Solves the relaxation with the dense simplex. The result is a basic
/// solution, so at most one RB is shared or partially used; a violation is
/// reported as an error rather than returned.
pub fn solve_rlp(cell: &SingleCellInstance) -> Result<FractionalSolution> {
    let (n, kappa) = (cell.users(), cell.rb_count());
    let c = cell.capacity();
    let mut x = vec![0.0; n * kappa];
    let mut out = FractionalSolution {
        users: n,
        rb_count: kappa,
        x: Vec::new(),
        lp_value: 0.0,
        fractional_rbs: Vec::new(),
        pivots: 0,
    };
    // Columns with zero profit never enter an optimal basis usefully.
    let cols: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..kappa).map(move |k| (j, k)))
        .filter(|&(j, k)| cell.weight(j) > 0.0 && cell.gamma(j, k) > 0.0)
        .collect();
    if c > 0.0 && !cols.is_empty() {
        let obj: Vec<f64> = cols.iter().map(|&(j, k)| cell.weight(j) * cell.gamma(j, k)).collect();
        let mut rows = vec![vec![0.0; cols.len()]; kappa + 1];
        for (col, &(j, k)) in cols.iter().enumerate() {
            rows[k][col] = 1.0;
            // capacity row scaled to unit right-hand side
            rows[kappa][col] = cell.gamma(j, k) / c;
        }
        let rhs = vec![1.0; kappa + 1];
        let sol = lp::maximize(&obj, &rows, &rhs)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Structure("relaxation reported unbounded".into()));
        }
        for (col, &(j, k)) in cols.iter().enumerate() {
            let mut v = sol.x[col];
            if v < SNAP {
                v = 0.0;
            } else if v > 1.0 - SNAP {
                v = 1.0;
            }
            x[j * kappa + k] = v;
        }
        out.pivots = sol.pivots;
    }
    out.lp_value = (0..n)
        .flat_map(|j| (0..kappa).map(move |k| (j, k)))
        .map(|(j, k)| cell.weight(j) * cell.gamma(j, k) * x[j * kappa + k])
        .sum();
    out.fractional_rbs = (0..kappa)
        .filter(|&k| (0..n).any(|j| x[j * kappa + k] > 0.0 && x[j * kappa + k] < 1.0))
        .collect();
    out.x = x;
    if out.fractional_rbs.len() > 1 {
        return Err(Error::Structure(format!(
            "relaxation vertex has {} fractional RBs",
            out.fractional_rbs.len()
        )));
    }
    Ok(out)
}

/// LP rounding with a factor-2 guarantee: the better of the integral part of
/// the LP vertex and the best single RB.
pub fn rounding_ad(cell: &SingleCellInstance) -> Result<SolveResult> {
    let inst = cell.as_instance();
    let (f_max, single) = best_single_rb(cell);
    let frac = solve_rlp(cell)?;
    let mut assignment = Assignment::empty(inst);
    let mut integral = 0.0;
    for k in 0..cell.rb_count() {
        if let Some(j) = (0..cell.users()).find(|&j| frac.x(j, k) == 1.0) {
            assignment.set(0, k, Some(j));
            integral += cell.weight(j) * cell.gamma(j, k);
        }
    }
    let (alloc, branch) = if integral >= f_max {
        let mut a = waterfill(inst, &assignment);
        prune_zero_rates(inst, &mut a);
        (a, 0.0)
    } else {
        (single, 1.0)
    };
    Ok(SolveResult::new(inst, alloc)?
        .with_meta("lp_optimum", frac.lp_value)
        .with_meta("integral_value", integral)
        .with_meta("f_max", f_max)
        .with_meta("single_rb_branch", branch)
        .with_meta("fractional_rbs", frac.fractional_rbs.len() as f64)
        .with_meta("iterations", frac.pivots as f64))
}
