//! Domain types for the single-slot scheduling problem.
//!
//! Indexing convention: RU `i`, user `j` (local to its RU), RB `k`. Users are
//! also addressed by a flat index `u = offset(i) + j`; per-triple tensors are
//! stored flat at `u * rb_count + k`.

mod gen;
mod io;

pub use gen::{counterexample, CorpusParams};
pub use io::{Capacity, InstanceFile};

use std::collections::BTreeMap;

use crate::alloc::waterfill;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Absolute tolerance on constraint slacks, scaled up for large magnitudes.
pub const FEAS_TOL: f64 = 1e-9;

/// Default enumeration budget for [`brute_force_oracle`].
pub const DEFAULT_ENUM_BUDGET: u128 = 2_000_000;

pub(crate) fn tol_for(scale: f64) -> f64 {
    FEAS_TOL * scale.abs().max(1.0)
}

/// A triple `(ru, user, rb)`.
pub type Triple = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    users_per_ru: Vec<usize>,
    user_offset: Vec<usize>,
    rb_count: usize,
    gamma: Vec<f64>,
    weight: Vec<f64>,
    ru_capacity: Vec<f64>,
    total_capacity: f64,
}

impl Instance {
    /// Builds an instance from nested tensors: `weight[i][j]`, `gamma[i][j][k]`.
    pub fn new(
        rb_count: usize,
        ru_capacity: Vec<f64>,
        total_capacity: f64,
        weight: Vec<Vec<f64>>,
        gamma: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let m = ru_capacity.len();
        if m == 0 {
            return Err(Error::Structure("at least one RU is required".into()));
        }
        if rb_count == 0 {
            return Err(Error::Structure("at least one RB is required".into()));
        }
        if weight.len() != m || gamma.len() != m {
            return Err(Error::Structure(format!(
                "ru_capacity has {m} RUs but weight has {} and gamma has {}",
                weight.len(),
                gamma.len()
            )));
        }
        if !(total_capacity.is_finite() && total_capacity >= 0.0) {
            return Err(Error::Structure(format!(
                "total capacity must be finite and nonnegative, got {total_capacity}"
            )));
        }
        for (i, c) in ru_capacity.iter().enumerate() {
            if c.is_nan() || *c < 0.0 {
                return Err(Error::Structure(format!("RU {i} capacity {c} is negative")));
            }
        }
        let mut users_per_ru = Vec::with_capacity(m);
        let mut flat_w = Vec::new();
        let mut flat_g = Vec::new();
        for i in 0..m {
            let n = weight[i].len();
            if gamma[i].len() != n {
                return Err(Error::Structure(format!(
                    "RU {i}: {n} weights but {} gamma rows",
                    gamma[i].len()
                )));
            }
            users_per_ru.push(n);
            for j in 0..n {
                let w = weight[i][j];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::Structure(format!("weight ({i},{j}) = {w} is invalid")));
                }
                flat_w.push(w);
                if gamma[i][j].len() != rb_count {
                    return Err(Error::Structure(format!(
                        "gamma ({i},{j}) has {} RBs, expected {rb_count}",
                        gamma[i][j].len()
                    )));
                }
                for (k, &g) in gamma[i][j].iter().enumerate() {
                    if !(g.is_finite() && g >= 0.0) {
                        return Err(Error::Structure(format!(
                            "gamma ({i},{j},{k}) = {g} is invalid"
                        )));
                    }
                    flat_g.push(g);
                }
            }
        }
        Ok(Self::from_flat(users_per_ru, rb_count, flat_g, flat_w, ru_capacity, total_capacity))
    }

    pub(crate) fn from_flat(
        users_per_ru: Vec<usize>,
        rb_count: usize,
        gamma: Vec<f64>,
        weight: Vec<f64>,
        ru_capacity: Vec<f64>,
        total_capacity: f64,
    ) -> Self {
        let mut user_offset = Vec::with_capacity(users_per_ru.len() + 1);
        let mut acc = 0;
        user_offset.push(0);
        for n in &users_per_ru {
            acc += n;
            user_offset.push(acc);
        }
        debug_assert_eq!(weight.len(), acc);
        debug_assert_eq!(gamma.len(), acc * rb_count);
        Instance { users_per_ru, user_offset, rb_count, gamma, weight, ru_capacity, total_capacity }
    }

    pub fn ru_count(&self) -> usize {
        self.users_per_ru.len()
    }

    pub fn users_per_ru(&self) -> &[usize] {
        &self.users_per_ru
    }

    pub fn users(&self, i: usize) -> usize {
        self.users_per_ru[i]
    }

    pub fn user_count(&self) -> usize {
        *self.user_offset.last().unwrap()
    }

    pub fn rb_count(&self) -> usize {
        self.rb_count
    }

    /// Flat user index of `(i, j)`.
    pub fn user_index(&self, i: usize, j: usize) -> usize {
        self.user_offset[i] + j
    }

    /// Inverse of [`Instance::user_index`].
    pub fn user_of(&self, u: usize) -> (usize, usize) {
        let i = self.user_offset.partition_point(|&o| o <= u) - 1;
        (i, u - self.user_offset[i])
    }

    pub fn triple_index(&self, i: usize, j: usize, k: usize) -> usize {
        self.user_index(i, j) * self.rb_count + k
    }

    pub fn triple_count(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[self.triple_index(i, j, k)]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weight[self.user_index(i, j)]
    }

    pub fn gamma_flat(&self) -> &[f64] {
        &self.gamma
    }

    pub fn weight_flat(&self) -> &[f64] {
        &self.weight
    }

    pub fn ru_capacity(&self, i: usize) -> f64 {
        self.ru_capacity[i]
    }

    pub fn ru_capacities(&self) -> &[f64] {
        &self.ru_capacity
    }

    pub fn total_capacity(&self) -> f64 {
        self.total_capacity
    }

    /// All triples in lexicographic `(i, j, k)` order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        (0..self.ru_count()).flat_map(move |i| {
            (0..self.users(i)).flat_map(move |j| (0..self.rb_count).map(move |k| (i, j, k)))
        })
    }

    /// Same rates and weights with new capacities.
    pub fn with_capacities(&self, ru_capacity: Vec<f64>, total_capacity: f64) -> Result<Self> {
        if ru_capacity.len() != self.ru_count() {
            return Err(Error::Structure("capacity vector length mismatch".into()));
        }
        let mut out = self.clone();
        out.ru_capacity = ru_capacity;
        out.total_capacity = total_capacity;
        Ok(out)
    }

    /// Capacities multiplied by `factor` (infinite RU capacities stay infinite).
    pub fn scaled_capacities(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.ru_capacity {
            *c *= factor;
        }
        out.total_capacity *= factor;
        out
    }

    /// Same rates and capacities with a new flat weight vector.
    pub fn with_weights(&self, weight: Vec<f64>) -> Result<Self> {
        if weight.len() != self.user_count() {
            return Err(Error::Structure("weight vector length mismatch".into()));
        }
        let mut out = self.clone();
        out.weight = weight;
        Ok(out)
    }

    /// Whether the per-RU constraints are implied by the total constraint.
    pub fn ru_capacities_redundant(&self) -> bool {
        self.ru_count() == 1 || self.ru_capacity.iter().all(|&c| c >= self.total_capacity)
    }
}

/// Single-RU view used by the overall-capacity algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleCellInstance {
    inner: Instance,
}

impl SingleCellInstance {
    /// `weight[j]`, `gamma[j][k]`, total capacity `capacity`.
    pub fn new(rb_count: usize, capacity: f64, weight: Vec<f64>, gamma: Vec<Vec<f64>>) -> Result<Self> {
        let inner = Instance::new(rb_count, vec![f64::INFINITY], capacity, vec![weight], vec![gamma])?;
        Ok(SingleCellInstance { inner })
    }

    /// Views a one-RU instance as single-cell; the RU capacity folds into `C`.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        if inst.ru_count() != 1 {
            return Err(Error::Structure(format!(
                "single-cell view needs exactly one RU, got {}; use `flatten`",
                inst.ru_count()
            )));
        }
        let c = inst.total_capacity().min(inst.ru_capacity(0));
        let inner = inst.with_capacities(vec![f64::INFINITY], c)?;
        Ok(SingleCellInstance { inner })
    }

    pub fn as_instance(&self) -> &Instance {
        &self.inner
    }

    pub fn into_instance(self) -> Instance {
        self.inner
    }

    pub fn users(&self) -> usize {
        self.inner.users(0)
    }

    pub fn rb_count(&self) -> usize {
        self.inner.rb_count()
    }

    pub fn gamma(&self, j: usize, k: usize) -> f64 {
        self.inner.gamma[j * self.inner.rb_count + k]
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.inner.weight[j]
    }

    pub fn capacity(&self) -> f64 {
        self.inner.total_capacity
    }

    pub fn with_capacity(&self, capacity: f64) -> Result<Self> {
        Ok(SingleCellInstance { inner: self.inner.with_capacities(vec![f64::INFINITY], capacity)? })
    }
}

/// A multi-RU instance with redundant RU capacities, re-expressed as one cell
/// with `Σ n_i` users and `m·κ` RBs. Cross-RU rates are zero.
#[derive(Debug, Clone)]
pub struct Flattened {
    pub cell: SingleCellInstance,
}

impl Flattened {
    pub fn new(inst: &Instance) -> Result<Self> {
        if inst.ru_count() == 1 {
            return Ok(Flattened { cell: SingleCellInstance::from_instance(inst)? });
        }
        if !inst.ru_capacities_redundant() {
            return Err(Error::Structure(
                "single-cell solvers need every RU capacity >= total capacity".into(),
            ));
        }
        let kappa = inst.rb_count();
        let users = inst.user_count();
        let rbs = inst.ru_count() * kappa;
        let mut gamma = vec![0.0; users * rbs];
        for (i, j, k) in inst.triples() {
            let u = inst.user_index(i, j);
            gamma[u * rbs + i * kappa + k] = inst.gamma(i, j, k);
        }
        let inner = Instance::from_flat(
            vec![users],
            rbs,
            gamma,
            inst.weight.clone(),
            vec![f64::INFINITY],
            inst.total_capacity(),
        );
        Ok(Flattened { cell: SingleCellInstance { inner } })
    }

    /// Maps an allocation on the flat cell back to the source instance.
    /// Assignments of a user to a foreign RU's RB are dropped (their rate is 0).
    pub fn lift(&self, src: &Instance, flat: &Allocation) -> Allocation {
        let kappa = src.rb_count();
        let cell = self.cell.as_instance();
        let mut out = Allocation::zero(src);
        for (_, u, rb) in flat.assignment.assigned() {
            let (i, j) = src.user_of(u);
            if rb / kappa != i {
                continue;
            }
            let k = rb % kappa;
            out.assignment.set(i, k, Some(j));
            out.rates[src.triple_index(i, j, k)] = flat.rates[cell.triple_index(0, u, rb)];
        }
        out
    }
}

/// RB-to-user map, one optional user per `(ru, rb)` slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    rb_count: usize,
    slots: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(inst: &Instance) -> Self {
        Assignment { rb_count: inst.rb_count(), slots: vec![None; inst.ru_count() * inst.rb_count()] }
    }

    pub fn ru_count(&self) -> usize {
        self.slots.len() / self.rb_count
    }

    pub fn rb_count(&self) -> usize {
        self.rb_count
    }

    pub fn get(&self, i: usize, k: usize) -> Option<usize> {
        self.slots[i * self.rb_count + k]
    }

    pub fn set(&mut self, i: usize, k: usize, user: Option<usize>) {
        self.slots[i * self.rb_count + k] = user;
    }

    /// Assigned triples in `(i, k)` order.
    pub fn assigned(&self) -> impl Iterator<Item = Triple> + '_ {
        self.slots.iter().enumerate().filter_map(move |(s, u)| {
            u.map(|j| (s / self.rb_count, j, s % self.rb_count))
        })
    }

    pub fn len(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.rb_count != inst.rb_count() || self.ru_count() != inst.ru_count() {
            return Err(Error::Structure("assignment shape does not match instance".into()));
        }
        for (i, j, k) in self.assigned() {
            if j >= inst.users(i) {
                return Err(Error::Structure(format!(
                    "slot ({i},{k}) references user {j} but RU {i} has {} users",
                    inst.users(i)
                )));
            }
        }
        Ok(())
    }
}

/// Rates paired with the assignment that licenses them.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub assignment: Assignment,
    /// Flat per-triple rates, see [`Instance::triple_index`].
    pub rates: Vec<f64>,
}

impl Allocation {
    pub fn zero(inst: &Instance) -> Self {
        Allocation { assignment: Assignment::empty(inst), rates: vec![0.0; inst.triple_count()] }
    }

    pub fn rate(&self, inst: &Instance, i: usize, j: usize, k: usize) -> f64 {
        self.rates[inst.triple_index(i, j, k)]
    }

    /// `Σ_k y_ijk` for flat user `u`.
    pub fn user_total(&self, inst: &Instance, u: usize) -> f64 {
        let kappa = inst.rb_count();
        self.rates[u * kappa..(u + 1) * kappa].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeRate { triple: Triple, rate: f64 },
    /// Rate cap: `y > γ` on an assigned triple.
    AboveGamma { triple: Triple, excess: f64 },
    /// Positive rate on a triple whose slot is not assigned to that user.
    Unassigned { triple: Triple, rate: f64 },
    RuCapacity { ru: usize, excess: f64 },
    TotalCapacity { excess: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_feasible(inst: &Instance, alloc: &Allocation) -> Result<FeasibilityReport> {
    alloc.assignment.validate(inst)?;
    if alloc.rates.len() != inst.triple_count() {
        return Err(Error::Structure(format!(
            "rate tensor has {} entries, instance has {} triples",
            alloc.rates.len(),
            inst.triple_count()
        )));
    }
    let mut report = FeasibilityReport::default();
    let mut ru_used = vec![0.0; inst.ru_count()];
    let mut total = 0.0;
    for (i, j, k) in inst.triples() {
        let y = alloc.rate(inst, i, j, k);
        let g = inst.gamma(i, j, k);
        if y.is_nan() || y < -FEAS_TOL {
            report.violations.push(Violation::NegativeRate { triple: (i, j, k), rate: y });
            continue;
        }
        if alloc.assignment.get(i, k) == Some(j) {
            if y > g + tol_for(g) {
                report.violations.push(Violation::AboveGamma { triple: (i, j, k), excess: y - g });
            }
        } else if y > FEAS_TOL {
            report.violations.push(Violation::Unassigned { triple: (i, j, k), rate: y });
        }
        ru_used[i] += y;
        total += y;
    }
    for (i, used) in ru_used.iter().enumerate() {
        let c = inst.ru_capacity(i);
        if *used > c + tol_for(c) {
            report.violations.push(Violation::RuCapacity { ru: i, excess: used - c });
        }
    }
    let c = inst.total_capacity();
    if total > c + tol_for(c) {
        report.violations.push(Violation::TotalCapacity { excess: total - c });
    }
    Ok(report)
}

/// `Σ_u w_u Σ_k y_uk` on a raw flat rate tensor, no feasibility check.
pub fn weighted_sum(inst: &Instance, rates: &[f64]) -> f64 {
    let kappa = inst.rb_count();
    inst.weight
        .iter()
        .enumerate()
        .map(|(u, w)| w * rates[u * kappa..(u + 1) * kappa].iter().sum::<f64>())
        .sum()
}

/// Weighted throughput of a feasible allocation.
pub fn objective_of(inst: &Instance, alloc: &Allocation) -> Result<f64> {
    let report = check_feasible(inst, alloc)?;
    if !report.is_feasible() {
        return Err(Error::Infeasible(format!("{:?}", report.violations)));
    }
    Ok(weighted_sum(inst, &alloc.rates))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub allocation: Allocation,
    pub objective: f64,
    pub meta: BTreeMap<String, f64>,
}

impl SolveResult {
    /// Checks feasibility and evaluates the objective.
    pub fn new(inst: &Instance, allocation: Allocation) -> Result<Self> {
        let objective = objective_of(inst, &allocation)?;
        Ok(SolveResult { allocation, objective, meta: BTreeMap::new() })
    }

    pub fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }

    pub fn meta(&self, key: &str) -> Option<f64> {
        self.meta.get(key).copied()
    }
}

/// Number of assignments the oracle would enumerate, saturating.
pub fn enumeration_size(inst: &Instance) -> u128 {
    let mut total: u128 = 1;
    for i in 0..inst.ru_count() {
        for _ in 0..inst.rb_count() {
            total = total.saturating_mul(inst.users(i) as u128 + 1);
        }
    }
    total
}

/// Exact optimum by enumerating every assignment and water-filling each.
pub fn brute_force_oracle(inst: &Instance) -> Result<SolveResult> {
    brute_force_oracle_with(inst, DEFAULT_ENUM_BUDGET, Exec::default())
}

pub fn brute_force_oracle_with(inst: &Instance, budget: u128, exec: Exec) -> Result<SolveResult> {
    let size = enumeration_size(inst);
    if size > budget {
        return Err(Error::Budget { what: "assignment enumeration", required: size, budget });
    }
    let decode = |mut idx: usize| {
        let mut a = Assignment::empty(inst);
        for i in 0..inst.ru_count() {
            let radix = inst.users(i) + 1;
            for k in 0..inst.rb_count() {
                let d = idx % radix;
                idx /= radix;
                if d > 0 {
                    a.set(i, k, Some(d - 1));
                }
            }
        }
        a
    };
    let (best, _) = par::argmax_range(exec, size as usize, |idx| {
        let alloc = waterfill(inst, &decode(idx));
        Some(weighted_sum(inst, &alloc.rates))
    })
    .expect("enumeration contains at least the empty assignment");
    let alloc = waterfill(inst, &decode(best));
    Ok(SolveResult::new(inst, alloc)?.with_meta("enumerated", size as f64))
}

/// Integer-valued single-cell instance for the dynamic programs.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedInstance {
    rb_count: usize,
    weight: Vec<f64>,
    gamma: Vec<u64>,
    capacity: u64,
    quantum: f64,
    clamped: bool,
}

/// Largest integer the quantizer will produce (exactly representable as f64).
const MAX_QUANTIZED: f64 = 9_007_199_254_740_992.0;

/// `γ' = ⌊min(γ, C)/q⌋`, `C' = ⌊C/q⌋`.
pub fn quantize(cell: &SingleCellInstance, quantum: f64) -> Result<QuantizedInstance> {
    if !(quantum.is_finite() && quantum > 0.0) {
        return Err(Error::Parameter(format!("quantum must be positive, got {quantum}")));
    }
    let c = cell.capacity();
    let to_int = |x: f64| -> Result<u64> {
        let v = (x / quantum).floor();
        if v > MAX_QUANTIZED {
            return Err(Error::Parameter(format!("quantum {quantum} too small for value {x}")));
        }
        Ok(v as u64)
    };
    let mut clamped = false;
    let mut gamma = Vec::with_capacity(cell.users() * cell.rb_count());
    for j in 0..cell.users() {
        for k in 0..cell.rb_count() {
            let g = cell.gamma(j, k);
            if g > c {
                clamped = true;
            }
            gamma.push(to_int(g.min(c))?);
        }
    }
    Ok(QuantizedInstance {
        rb_count: cell.rb_count(),
        weight: cell.as_instance().weight.clone(),
        gamma,
        capacity: to_int(c)?,
        quantum,
        clamped,
    })
}

impl QuantizedInstance {
    /// Integer instance from flat `gamma[j * rb_count + k]`, without clamping.
    pub fn from_parts(
        rb_count: usize,
        weight: Vec<f64>,
        gamma: Vec<u64>,
        capacity: u64,
        quantum: f64,
    ) -> Result<Self> {
        if rb_count == 0 || gamma.len() != weight.len() * rb_count {
            return Err(Error::Structure("quantized tensor shape mismatch".into()));
        }
        if !(quantum.is_finite() && quantum > 0.0) {
            return Err(Error::Parameter(format!("quantum must be positive, got {quantum}")));
        }
        if weight.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Structure("weights must be finite and nonnegative".into()));
        }
        Ok(QuantizedInstance { rb_count, weight, gamma, capacity, quantum, clamped: false })
    }

    pub fn users(&self) -> usize {
        self.weight.len()
    }

    pub fn rb_count(&self) -> usize {
        self.rb_count
    }

    pub fn gamma(&self, j: usize, k: usize) -> u64 {
        self.gamma[j * self.rb_count + k]
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weight[j]
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    /// Whether any rate was clamped down to the capacity.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// The instance with `γ'·q`, `C'·q`.
    pub fn dequantized(&self) -> SingleCellInstance {
        let q = self.quantum;
        let inner = Instance::from_flat(
            vec![self.users()],
            self.rb_count,
            self.gamma.iter().map(|&g| g as f64 * q).collect(),
            self.weight.clone(),
            vec![f64::INFINITY],
            self.capacity as f64 * q,
        );
        SingleCellInstance { inner }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample_pf_alloc(inst: &Instance) -> Allocation {
        let mut a = Allocation::zero(inst);
        for k in 0..4 {
            a.assignment.set(0, k, Some(1));
        }
        for (k, y) in [4.0, 3.0, 0.0, 0.0].into_iter().enumerate() {
            a.rates[inst.triple_index(0, 1, k)] = y;
        }
        a
    }

    #[test]
    fn counterexample_pf_allocation_is_feasible_and_worth_three_and_a_half() {
        let inst = counterexample(7.0);
        let a = counterexample_pf_alloc(&inst);
        assert!(check_feasible(&inst, &a).unwrap().is_feasible());
        assert!((objective_of(&inst, &a).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn counterexample_better_allocation_is_worth_five() {
        let inst = counterexample(7.0);
        let mut a = Allocation::zero(&inst);
        for k in 0..3 {
            a.assignment.set(0, k, Some(0));
            a.rates[inst.triple_index(0, 0, k)] = 1.0;
        }
        a.assignment.set(0, 3, Some(1));
        a.rates[inst.triple_index(0, 1, 3)] = 4.0;
        assert_eq!(objective_of(&inst, &a).unwrap(), 5.0);
    }

    #[test]
    fn zero_allocation_is_feasible_with_zero_objective() {
        let inst = counterexample(7.0);
        let a = Allocation::zero(&inst);
        assert!(check_feasible(&inst, &a).unwrap().is_feasible());
        assert_eq!(objective_of(&inst, &a).unwrap(), 0.0);
    }

    #[test]
    fn rate_above_gamma_reports_both_constraints() {
        let inst = counterexample(7.0);
        let mut a = Allocation::zero(&inst);
        a.assignment.set(0, 0, Some(1));
        a.rates[inst.triple_index(0, 1, 0)] = 8.0;
        let r = check_feasible(&inst, &a).unwrap();
        assert!(!r.is_feasible());
        assert!(r.violations.iter().any(|v| matches!(v, Violation::AboveGamma { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::TotalCapacity { .. })));
        assert!(matches!(objective_of(&inst, &a), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rate_on_unassigned_triple_is_a_violation() {
        let inst = counterexample(7.0);
        let mut a = Allocation::zero(&inst);
        a.rates[inst.triple_index(0, 0, 2)] = 0.5;
        let r = check_feasible(&inst, &a).unwrap();
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let inst = counterexample(7.0);
        let other = Instance::new(2, vec![1.0], 1.0, vec![vec![1.0]], vec![vec![vec![1.0, 1.0]]]).unwrap();
        let a = Allocation::zero(&other);
        assert!(matches!(check_feasible(&inst, &a), Err(Error::Structure(_))));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(Instance::new(2, vec![1.0], 1.0, vec![vec![1.0]], vec![vec![vec![1.0]]]).is_err());
        assert!(Instance::new(1, vec![1.0], f64::INFINITY, vec![vec![1.0]], vec![vec![vec![1.0]]]).is_err());
        assert!(Instance::new(1, vec![1.0], 1.0, vec![vec![-1.0]], vec![vec![vec![1.0]]]).is_err());
    }

    #[test]
    fn oracle_on_counterexample_is_five() {
        let r = brute_force_oracle(&counterexample(7.0)).unwrap();
        assert!((r.objective - 5.0).abs() < 1e-12);
        assert_eq!(r.meta("enumerated"), Some(81.0));
    }

    #[test]
    fn oracle_zero_capacity_and_single_choice() {
        assert_eq!(brute_force_oracle(&counterexample(0.0)).unwrap().objective, 0.0);
        let one = Instance::new(1, vec![f64::INFINITY], 10.0, vec![vec![2.0]], vec![vec![vec![3.0]]]).unwrap();
        assert_eq!(brute_force_oracle(&one).unwrap().objective, 6.0);
    }

    #[test]
    fn oracle_refuses_over_budget() {
        let inst = counterexample(7.0);
        match brute_force_oracle_with(&inst, 80, Exec::Sequential) {
            Err(Error::Budget { required, .. }) => assert_eq!(required, 81),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn oracle_sequential_and_parallel_agree() {
        let inst = counterexample(6.5);
        let a = brute_force_oracle_with(&inst, 1000, Exec::Sequential).unwrap();
        let b = brute_force_oracle_with(&inst, 1000, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quantize_examples() {
        let cell = SingleCellInstance::from_instance(&counterexample(7.0)).unwrap();
        let q = quantize(&cell, 1.0).unwrap();
        assert_eq!((q.gamma(0, 0), q.gamma(1, 3), q.capacity()), (1, 4, 7));
        assert!(!q.clamped());

        let c = SingleCellInstance::new(1, 10.0, vec![1.0], vec![vec![2.7]]).unwrap();
        let q = quantize(&c, 0.5).unwrap();
        assert_eq!((q.gamma(0, 0), q.capacity()), (5, 20));

        let c = SingleCellInstance::new(1, 7.0, vec![1.0], vec![vec![12.0]]).unwrap();
        let q = quantize(&c, 1.0).unwrap();
        assert_eq!(q.gamma(0, 0), 7);
        assert!(q.clamped());
        let before = brute_force_oracle(c.as_instance()).unwrap().objective;
        let after = brute_force_oracle(q.dequantized().as_instance()).unwrap().objective;
        assert_eq!(before, after);

        assert!(quantize(&c, 0.0).is_err());
        assert!(quantize(&c, -1.0).is_err());
    }

    #[test]
    fn flatten_and_lift_preserve_objective() {
        let inst = Instance::new(
            2,
            vec![f64::INFINITY, 50.0],
            10.0,
            vec![vec![1.0, 0.5], vec![2.0]],
            vec![vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![vec![5.0, 6.0]]],
        )
        .unwrap();
        let flat = Flattened::new(&inst).unwrap();
        assert_eq!(flat.cell.users(), 3);
        assert_eq!(flat.cell.rb_count(), 4);
        assert_eq!(flat.cell.gamma(2, 2), 5.0);
        assert_eq!(flat.cell.gamma(2, 0), 0.0);
        let a = brute_force_oracle(&inst).unwrap();
        let b = brute_force_oracle(flat.cell.as_instance()).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12);
        let lifted = flat.lift(&inst, &b.allocation);
        assert!((objective_of(&inst, &lifted).unwrap() - b.objective).abs() < 1e-12);

        let binding = inst.with_capacities(vec![5.0, 5.0], 10.0).unwrap();
        assert!(Flattened::new(&binding).is_err());
    }

    #[test]
    fn user_index_round_trip() {
        let inst = Instance::new(
            1,
            vec![1.0, 1.0, 1.0],
            1.0,
            vec![vec![1.0, 1.0], vec![], vec![1.0]],
            vec![vec![vec![0.0], vec![0.0]], vec![], vec![vec![0.0]]],
        )
        .unwrap();
        for u in 0..inst.user_count() {
            let (i, j) = inst.user_of(u);
            assert_eq!(inst.user_index(i, j), u);
        }
        assert_eq!(inst.user_of(2), (2, 0));
    }
}
