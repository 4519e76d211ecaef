//! Algorithms for the case where only the total PON capacity binds.
//!
//! Everything here works on a [`SingleCellInstance`]: one RU, users `j`, RBs
//! `k`. Multi-RU instances whose RU capacities are redundant reach these
//! solvers through [`crate::model::Flattened`].

mod dp;
mod dual;
mod fptas;
mod rlp;

pub use dp::{dp_capacity, dp_capacity_with_budget, dp_optimal, dp_profit, usable_capacity, DpTable, ProfitTable};
pub use dual::{dual_min_bound, dual_upper_bound, sample_lambdas};
pub use fptas::{fptas_discrete, half_approx_almost_discrete};
pub use rlp::{rounding_ad, solve_rlp, FractionalSolution};

use crate::model::{Allocation, SingleCellInstance};

/// Default cap on dynamic-programming table cells.
pub const DEFAULT_TABLE_BUDGET: u128 = 100_000_000;

/// Best allocation that uses a single RB: `max_jk w_j min(γ_jk, C)`.
/// Ties go to the lowest `(j, k)`. Returns value 0 and the zero allocation if
/// no RB is worth anything.
pub fn best_single_rb(cell: &SingleCellInstance) -> (f64, Allocation) {
    let inst = cell.as_instance();
    let c = cell.capacity();
    let mut best: Option<(usize, usize, f64)> = None;
    for j in 0..cell.users() {
        for k in 0..cell.rb_count() {
            let v = cell.weight(j) * cell.gamma(j, k).min(c);
            if v > best.map_or(0.0, |b| b.2) {
                best = Some((j, k, v));
            }
        }
    }
    let mut alloc = Allocation::zero(inst);
    match best {
        Some((j, k, v)) => {
            alloc.assignment.set(0, k, Some(j));
            alloc.rates[inst.triple_index(0, j, k)] = cell.gamma(j, k).min(c);
            (v, alloc)
        }
        None => (0.0, alloc),
    }
}

/// Drops assigned triples that carry no rate.
pub(crate) fn prune_zero_rates(inst: &crate::model::Instance, alloc: &mut Allocation) {
    let assigned: Vec<_> = alloc.assignment.assigned().collect();
    for (i, j, k) in assigned {
        if alloc.rates[inst.triple_index(i, j, k)] <= 0.0 {
            alloc.assignment.set(i, k, None);
        }
    }
}
