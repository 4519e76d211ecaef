//! Rate allocation for a fixed RB assignment.

use crate::model::{tol_for, Allocation, Assignment, Instance, Triple};

/// Assigned triples sorted by weight descending, ties by `(i, j, k)`.
fn weight_order(inst: &Instance, assignment: &Assignment) -> Vec<Triple> {
    let mut order: Vec<Triple> = assignment.assigned().collect();
    order.sort_by(|a, b| {
        inst.weight(b.0, b.1)
            .total_cmp(&inst.weight(a.0, a.1))
            .then_with(|| a.cmp(b))
    });
    order
}

/// Optimal rates for `assignment`: walk assigned triples in decreasing weight
/// order and give each `min(γ, remaining C, remaining C_i)`.
pub fn waterfill(inst: &Instance, assignment: &Assignment) -> Allocation {
    fill_in_order(inst, assignment, |i, j, k| inst.gamma(i, j, k))
}

/// Water-filling with per-triple targets in place of `γ`. Used to truncate
/// rounded solutions back into the capacity region.
pub fn fill_in_order<F>(inst: &Instance, assignment: &Assignment, target: F) -> Allocation
where
    F: Fn(usize, usize, usize) -> f64,
{
    let mut alloc = Allocation { assignment: assignment.clone(), rates: vec![0.0; inst.triple_count()] };
    let mut total_left = inst.total_capacity();
    let mut ru_left = inst.ru_capacities().to_vec();
    for (i, j, k) in weight_order(inst, assignment) {
        let y = target(i, j, k).min(total_left).min(ru_left[i]).max(0.0);
        alloc.rates[inst.triple_index(i, j, k)] = y;
        total_left -= y;
        ru_left[i] -= y;
    }
    alloc
}

/// Per-slot PF allocation at full rate, returned only when it respects every
/// capacity. It then attains `Σ_ik max_j w_ij γ_ijk`, which bounds any
/// allocation from above, so it is optimal.
pub fn pf_certificate(inst: &Instance) -> Option<Allocation> {
    let mut alloc = Allocation::zero(inst);
    let mut ru_used = Vec::with_capacity(inst.ru_count());
    for i in 0..inst.ru_count() {
        let mut used = 0.0;
        for k in 0..inst.rb_count() {
            let Some(j) = pf_user(inst, i, k) else { continue };
            let g = inst.gamma(i, j, k);
            alloc.assignment.set(i, k, Some(j));
            alloc.rates[inst.triple_index(i, j, k)] = g;
            used += g;
        }
        ru_used.push(used);
    }
    let total: f64 = ru_used.iter().sum();
    let ru_ok = ru_used
        .iter()
        .zip(inst.ru_capacities())
        .all(|(&u, &c)| u <= c + tol_for(c));
    let c = inst.total_capacity();
    (ru_ok && total <= c + tol_for(c)).then_some(alloc)
}

/// `argmax_j w_ij γ_ijk`, lowest `j` on ties; `None` if the RU has no users.
pub fn pf_user(inst: &Instance, i: usize, k: usize) -> Option<usize> {
    (0..inst.users(i)).fold(None, |best: Option<(usize, f64)>, j| {
        let v = inst.weight(i, j) * inst.gamma(i, j, k);
        match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((j, v)),
        }
    })
    .map(|(j, _)| j)
}

/// `Σ_ik max_j w_ij γ_ijk`: the capacity-free upper bound.
pub fn per_slot_bound(inst: &Instance) -> f64 {
    let mut total = 0.0;
    for i in 0..inst.ru_count() {
        for k in 0..inst.rb_count() {
            if let Some(j) = pf_user(inst, i, k) {
                total += inst.weight(i, j) * inst.gamma(i, j, k);
            }
        }
    }
    total
}
