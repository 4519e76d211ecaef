//! Capacity-aware adaptations of proportional fair.
//!
//! Both heuristics visit `(ru, rb)` slots in decreasing order of
//! `max_j w_ij γ_ijk` (ties by `(i, k)`) and give the picked user
//! `min(γ, remaining C_i, remaining C)`, stopping once the total capacity is
//! exhausted. They differ only in which user a slot goes to.

use crate::alloc::{pf_user, waterfill};
use crate::error::Result;
use crate::model::{Allocation, Assignment, Instance, SolveResult};

/// Remaining total capacity below this counts as exhausted.
const EXHAUSTED: f64 = 1e-12;

fn slot_order(inst: &Instance) -> Vec<(usize, usize, f64)> {
    let mut slots = Vec::with_capacity(inst.ru_count() * inst.rb_count());
    for i in 0..inst.ru_count() {
        for k in 0..inst.rb_count() {
            let idx = (0..inst.users(i)).map(|j| inst.weight(i, j) * inst.gamma(i, j, k)).fold(0.0, f64::max);
            slots.push((i, k, idx));
        }
    }
    slots.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    slots
}

fn sweep(inst: &Instance, pick: impl Fn(usize, usize) -> Option<usize>) -> Result<SolveResult> {
    let mut alloc = Allocation::zero(inst);
    let mut total_left = inst.total_capacity();
    let mut ru_left = inst.ru_capacities().to_vec();
    for (i, k, _) in slot_order(inst) {
        if total_left < EXHAUSTED {
            break;
        }
        let Some(j) = pick(i, k) else { continue };
        let y = inst.gamma(i, j, k).min(total_left).min(ru_left[i]).max(0.0);
        if y <= 0.0 {
            continue;
        }
        alloc.assignment.set(i, k, Some(j));
        alloc.rates[inst.triple_index(i, j, k)] = y;
        total_left -= y;
        ru_left[i] -= y;
    }
    SolveResult::new(inst, alloc)
}

/// Each slot goes to the user with the largest `w γ`.
pub fn max_yield(inst: &Instance) -> Result<SolveResult> {
    sweep(inst, |i, k| pf_user(inst, i, k))
}

/// Each slot goes to the user with the largest weight.
pub fn max_value(inst: &Instance) -> Result<SolveResult> {
    sweep(inst, |i, _| {
        (0..inst.users(i))
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if inst.weight(i, b) >= inst.weight(i, j) => best,
                _ => Some(j),
            })
    })
}

/// Plain PF: every slot to its `argmax_j w γ`, rates water-filled.
pub fn proportional_fair(inst: &Instance) -> Result<SolveResult> {
    let mut a = Assignment::empty(inst);
    for i in 0..inst.ru_count() {
        for k in 0..inst.rb_count() {
            a.set(i, k, pf_user(inst, i, k));
        }
    }
    SolveResult::new(inst, waterfill(inst, &a))
}
