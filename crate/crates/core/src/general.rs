//! Algorithms for the general problem with both per-RU and total capacities.
//!
//! The feasible assignments form a partition matroid over the ground set of
//! `(i, j, k)` triples (one block per `(i, k)` slot) and the water-filled
//! objective is a monotone submodular function of the chosen set, so the
//! plain greedy is a 1/2-approximation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alloc::{fill_in_order, waterfill};
use crate::error::{Error, Result};
use crate::model::{tol_for, weighted_sum, Assignment, Instance, SolveResult, Triple};
use crate::par::{self, Exec};

/// Gains at or below this end the greedy.
pub const GREEDY_MIN_GAIN: f64 = 1e-12;

/// An independent set of the partition matroid: at most one triple per slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet {
    slots: BTreeMap<(usize, usize), usize>,
}

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn contains(&self, (i, j, k): Triple) -> bool {
        self.slots.get(&(i, k)) == Some(&j)
    }

    /// Whether `S ∪ {t}` stays independent.
    pub fn can_add(&self, (i, _, k): Triple) -> bool {
        !self.slots.contains_key(&(i, k))
    }

    pub fn insert(&mut self, t: Triple) -> Result<()> {
        if self.contains(t) {
            return Ok(());
        }
        if !self.can_add(t) {
            return Err(Error::Structure(format!("slot ({}, {}) already taken", t.0, t.2)));
        }
        self.slots.insert((t.0, t.2), t.1);
        Ok(())
    }

    pub fn with(&self, t: Triple) -> Result<Self> {
        let mut s = self.clone();
        s.insert(t)?;
        Ok(s)
    }

    /// Triples in `(i, k)` order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.slots.iter().map(|(&(i, k), &j)| (i, j, k))
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Result<Self> {
        let mut s = Self::new();
        for t in triples {
            s.insert(t)?;
        }
        Ok(s)
    }

    pub fn from_assignment(a: &Assignment) -> Self {
        TripleSet { slots: a.assigned().map(|(i, j, k)| ((i, k), j)).collect() }
    }

    pub fn to_assignment(&self, inst: &Instance) -> Result<Assignment> {
        let mut a = Assignment::empty(inst);
        for (i, j, k) in self.iter() {
            if i >= inst.ru_count() || k >= inst.rb_count() || j >= inst.users(i) {
                return Err(Error::Structure(format!("triple ({i},{j},{k}) outside the instance")));
            }
            a.set(i, k, Some(j));
        }
        Ok(a)
    }
}

/// `f(S)`: water-filled objective of the assignment encoded by `S`.
pub fn submodular_value(inst: &Instance, s: &TripleSet) -> Result<f64> {
    let a = s.to_assignment(inst)?;
    Ok(weighted_sum(inst, &waterfill(inst, &a).rates))
}

/// Water-filled objective of `sorted` (already in water-filling order).
fn fill_value(inst: &Instance, sorted: &[Triple], extra: Option<Triple>) -> f64 {
    let mut total_left = inst.total_capacity();
    let mut ru_left = inst.ru_capacities().to_vec();
    let mut value = 0.0;
    let key = |t: &Triple| order_key(inst, *t);
    let mut extra = extra;
    let mut step = |t: Triple| {
        let y = inst.gamma(t.0, t.1, t.2).min(total_left).min(ru_left[t.0]).max(0.0);
        total_left -= y;
        ru_left[t.0] -= y;
        value += inst.weight(t.0, t.1) * y;
    };
    for t in sorted {
        if let Some(e) = extra {
            if key(&e) < key(t) {
                step(e);
                extra = None;
            }
        }
        step(*t);
    }
    if let Some(e) = extra {
        step(e);
    }
    value
}

/// Water-filling order: weight descending, then `(i, j, k)`. The bit pattern
/// of a nonnegative finite double orders like its value.
fn order_key(inst: &Instance, t: Triple) -> (std::cmp::Reverse<u64>, Triple) {
    (std::cmp::Reverse(inst.weight(t.0, t.1).to_bits()), t)
}

#[derive(Debug, Clone)]
pub struct GreedyStep {
    pub triple: Triple,
    pub gain: f64,
}

pub fn matroid_greedy(inst: &Instance) -> Result<SolveResult> {
    Ok(matroid_greedy_traced(inst, Exec::default())?.0)
}

pub fn matroid_greedy_with(inst: &Instance, exec: Exec) -> Result<SolveResult> {
    Ok(matroid_greedy_traced(inst, exec)?.0)
}

/// Greedy over the partition matroid: each round adds the triple with the
/// largest marginal gain in `f` (lowest `(i, j, k)` on ties) until no triple
/// gains more than [`GREEDY_MIN_GAIN`]. Candidate evaluation runs on `exec`.
pub fn matroid_greedy_traced(inst: &Instance, exec: Exec) -> Result<(SolveResult, Vec<GreedyStep>)> {
    let ground: Vec<Triple> = inst.triples().collect();
    let mut set = TripleSet::new();
    let mut sorted: Vec<Triple> = Vec::new();
    let mut current = 0.0;
    let mut trace = Vec::new();
    loop {
        let candidates: Vec<Triple> = ground.iter().copied().filter(|&t| set.can_add(t)).collect();
        let best = par::argmax_range(exec, candidates.len(), |c| {
            Some(fill_value(inst, &sorted, Some(candidates[c])))
        });
        let Some((c, value)) = best else { break };
        let gain = value - current;
        if gain <= GREEDY_MIN_GAIN {
            break;
        }
        let t = candidates[c];
        set.insert(t)?;
        let pos = sorted.partition_point(|&s| order_key(inst, s) < order_key(inst, t));
        sorted.insert(pos, t);
        current = value;
        trace.push(GreedyStep { triple: t, gain });
    }
    let alloc = waterfill(inst, &set.to_assignment(inst)?);
    let res = SolveResult::new(inst, alloc)?.with_meta("iterations", trace.len() as f64);
    Ok((res, trace))
}

/// Fractional solution of the two-level packing LP
/// `max Σ w_ij γ_ijk x_ijk  s.t.  Σ_j x_ijk ≤ 1,  Σ_jk γ x ≤ C_i,  Σ γ x ≤ C`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralFractional {
    /// Flat per-triple, see [`Instance::triple_index`].
    pub x: Vec<f64>,
    pub objective: f64,
    pub alpha: f64,
    pub iterations: usize,
}

/// Multiplicative-weights (Garg–Könemann style) solver for the fractional LP.
///
/// Lengths start at `u_ik = 1`, `v_i = 1/C_i`, `w = 1/C`. Each iteration picks
/// the triple with the least length per unit of objective,
/// `(u_ik + γ v_i + γ w) / (w_ij γ)`, raises `X` by the bottleneck step
/// `min(1, C_i/γ, C/γ)` and scales the three touched lengths by
/// `1 + ε·(load added / row capacity)`. It stops once the total weighted
/// length `Σ u + Σ C_i v_i + C w` reaches `((1+ε)·rows)^(1/ε) / (1+ε)`, or
/// after `⌈n ln n / ε²⌉` iterations. `X` is finally divided by its largest
/// relative row load so every constraint holds.
pub fn gk_fractional(inst: &Instance, epsilon: f64) -> Result<GeneralFractional> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    if let Some(u) = inst.weight_flat().iter().position(|&w| w <= 0.0) {
        return Err(Error::Parameter(format!("user {:?} has zero weight", inst.user_of(u))));
    }
    let kappa = inst.rb_count();
    let c_tot = inst.total_capacity();
    let mut xs = vec![0.0; inst.triple_count()];
    let cols: Vec<Triple> = inst
        .triples()
        .filter(|&(i, j, k)| inst.gamma(i, j, k) > 0.0 && inst.ru_capacity(i) > 0.0)
        .collect();
    if c_tot <= 0.0 || cols.is_empty() {
        return Ok(GeneralFractional { x: xs, objective: 0.0, alpha: 0.0, iterations: 0 });
    }
    let finite_ru: Vec<bool> = inst.ru_capacities().iter().map(|c| c.is_finite()).collect();
    let rows = inst.ru_count() * kappa + finite_ru.iter().filter(|&&f| f).count() + 1;

    let mut u = vec![1.0; inst.ru_count() * kappa];
    let mut v: Vec<f64> = inst
        .ru_capacities()
        .iter()
        .map(|&c| if c.is_finite() { 1.0 / c } else { 0.0 })
        .collect();
    let mut w = 1.0 / c_tot;

    let mut log_threshold = ((1.0 + epsilon) * rows as f64).ln() / epsilon - (1.0 + epsilon).ln();
    let n = cols.len() as f64;
    let max_iter = (n * n.ln().max(1.0) / (epsilon * epsilon)).ceil() as usize;
    let mut iterations = 0;
    while iterations < max_iter {
        let d: f64 = u.iter().sum::<f64>()
            + v.iter().zip(inst.ru_capacities()).filter(|(_, c)| c.is_finite()).map(|(v, c)| v * c).sum::<f64>()
            + w * c_tot;
        if d.ln() >= log_threshold {
            break;
        }
        if d > 1e200 {
            // lengths only matter up to scale
            let s = 1e-200;
            u.iter_mut().for_each(|x| *x *= s);
            v.iter_mut().for_each(|x| *x *= s);
            w *= s;
            log_threshold -= s.recip().ln();
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (c, &(i, j, k)) in cols.iter().enumerate() {
            let g = inst.gamma(i, j, k);
            let cost = (u[i * kappa + k] + g * (v[i] + w)) / (inst.weight(i, j) * g);
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((c, cost));
            }
        }
        let (c, _) = best.expect("nonempty columns");
        let (i, j, k) = cols[c];
        let g = inst.gamma(i, j, k);
        let ci = inst.ru_capacity(i);
        let step = 1.0f64.min(ci / g).min(c_tot / g);
        xs[inst.triple_index(i, j, k)] += step;
        u[i * kappa + k] *= 1.0 + epsilon * step;
        if finite_ru[i] {
            v[i] *= 1.0 + epsilon * step * g / ci;
        }
        w *= 1.0 + epsilon * step * g / c_tot;
        iterations += 1;
    }

    let mut slot_load = vec![0.0f64; inst.ru_count() * kappa];
    let mut ru_load = vec![0.0f64; inst.ru_count()];
    let mut tot_load = 0.0;
    for (i, j, k) in inst.triples() {
        let x = xs[inst.triple_index(i, j, k)];
        let g = inst.gamma(i, j, k);
        slot_load[i * kappa + k] += x;
        ru_load[i] += g * x;
        tot_load += g * x;
    }
    let mut alpha = slot_load.iter().copied().fold(tot_load / c_tot, f64::max);
    for (i, load) in ru_load.iter().enumerate() {
        if finite_ru[i] {
            alpha = alpha.max(load / inst.ru_capacity(i));
        }
    }
    if alpha > 0.0 {
        xs.iter_mut().for_each(|x| *x /= alpha);
    }
    let objective = inst
        .triples()
        .map(|(i, j, k)| inst.weight(i, j) * inst.gamma(i, j, k) * xs[inst.triple_index(i, j, k)])
        .sum();
    Ok(GeneralFractional { x: xs, objective, alpha, iterations })
}

/// Whether `frac` satisfies all three constraint families of `inst`.
pub fn fractional_feasible(inst: &Instance, frac: &GeneralFractional) -> bool {
    let kappa = inst.rb_count();
    let mut slot = vec![0.0; inst.ru_count() * kappa];
    let mut ru = vec![0.0; inst.ru_count()];
    let mut tot = 0.0;
    for (i, j, k) in inst.triples() {
        let x = frac.x[inst.triple_index(i, j, k)];
        if x < -1e-12 {
            return false;
        }
        let y = inst.gamma(i, j, k) * x;
        slot[i * kappa + k] += x;
        ru[i] += y;
        tot += y;
    }
    slot.iter().all(|&s| s <= 1.0 + 1e-9)
        && ru.iter().zip(inst.ru_capacities()).all(|(&r, &c)| r <= c + tol_for(c))
        && tot <= inst.total_capacity() + tol_for(inst.total_capacity())
}

/// Samples one user per slot with probability `x̂_ijk`, gives each sampled
/// triple its fractional rate per unit of `x̂` (that is `γ`), then truncates
/// in water-filling order so every capacity holds. `frac` must be feasible for
/// `inst` with capacities scaled by `shrink`. Slots whose distribution is
/// degenerate consume no randomness.
pub fn randomized_round(inst: &Instance, frac: &GeneralFractional, shrink: f64, seed: u64) -> Result<SolveResult> {
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(Error::Parameter(format!("shrink must lie in (0, 1], got {shrink}")));
    }
    if frac.x.len() != inst.triple_count() {
        return Err(Error::Structure("fractional solution shape mismatch".into()));
    }
    if !fractional_feasible(&inst.scaled_capacities(shrink), frac) {
        return Err(Error::Parameter("fractional solution is not feasible for the shrunk capacities".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = Assignment::empty(inst);
    for i in 0..inst.ru_count() {
        for k in 0..inst.rb_count() {
            let probs: Vec<f64> = (0..inst.users(i)).map(|j| frac.x[inst.triple_index(i, j, k)]).collect();
            if let Some(p) = probs.iter().find(|p| !(**p >= -1e-9 && **p <= 1.0 + 1e-9)) {
                return Err(Error::Parameter(format!("probability {p} outside [0, 1] at slot ({i},{k})")));
            }
            if probs.iter().sum::<f64>() > 1.0 + 1e-9 {
                return Err(Error::Parameter(format!("probabilities at slot ({i},{k}) sum above 1")));
            }
            let degenerate = probs.iter().all(|&p| p <= 1e-12 || p >= 1.0 - 1e-12);
            let pick = if degenerate {
                probs.iter().position(|&p| p >= 1.0 - 1e-12)
            } else {
                let r: f64 = rng.gen();
                let mut acc = 0.0;
                probs.iter().position(|&p| {
                    acc += p.max(0.0);
                    r < acc
                })
            };
            assignment.set(i, k, pick);
        }
    }
    let alloc = fill_in_order(inst, &assignment, |i, j, k| inst.gamma(i, j, k));
    Ok(SolveResult::new(inst, alloc)?
        .with_meta("fractional_objective", frac.objective)
        .with_meta("shrink", shrink))
}

/// Solve the fractional LP on shrunk capacities, then round once.
pub fn rounding(inst: &Instance, epsilon: f64, shrink: f64, seed: u64) -> Result<SolveResult> {
    let frac = gk_fractional(&inst.scaled_capacities(shrink), epsilon)?;
    Ok(randomized_round(inst, &frac, shrink, seed)?.with_meta("iterations", frac.iterations as f64))
}

/// Mean rounded objective over `seeds` independent seeds.
pub fn expected_rounded_objective(
    inst: &Instance,
    frac: &GeneralFractional,
    shrink: f64,
    seeds: std::ops::Range<u64>,
    exec: Exec,
) -> Result<f64> {
    let n = (seeds.end - seeds.start) as usize;
    if n == 0 {
        return Ok(0.0);
    }
    let vals = par::map_range(exec, n, |s| {
        randomized_round(inst, frac, shrink, seeds.start + s as u64).map(|r| r.objective)
    });
    let mut sum = 0.0;
    for v in vals {
        sum += v?;
    }
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{counterexample, objective_of, CorpusParams};
    use crate::singlecell::solve_rlp;
    use crate::model::SingleCellInstance;

    #[test]
    fn submodular_value_examples() {
        let inst = counterexample(7.0);
        assert_eq!(submodular_value(&inst, &TripleSet::new()).unwrap(), 0.0);
        let one = TripleSet::from_triples([(0, 1, 0)]).unwrap();
        assert_eq!(submodular_value(&inst, &one).unwrap(), 2.0);
        let four = TripleSet::from_triples([(0, 1, 0), (0, 1, 1), (0, 0, 2), (0, 0, 3)]).unwrap();
        assert_eq!(submodular_value(&inst, &four).unwrap(), 4.5);
    }

    #[test]
    fn triple_set_rejects_shared_slot() {
        let mut s = TripleSet::from_triples([(0, 0, 1)]).unwrap();
        assert!(s.insert((0, 1, 1)).is_err());
        assert!(s.insert((0, 0, 1)).is_ok());
        let bad = TripleSet::from_triples([(0, 5, 0)]).unwrap();
        assert!(submodular_value(&counterexample(7.0), &bad).is_err());
    }

    #[test]
    fn greedy_trace_on_counterexample() {
        let inst = counterexample(7.0);
        let (r, trace) = matroid_greedy_traced(&inst, Exec::Sequential).unwrap();
        assert!((r.objective - 4.5).abs() < 1e-12);
        let users: Vec<usize> = trace.iter().map(|s| s.triple.1).collect();
        let gains: Vec<f64> = trace.iter().map(|s| s.gain).collect();
        assert_eq!(users, vec![1, 1, 0, 0]);
        assert_eq!(gains, vec![2.0, 1.5, 0.5, 0.5]);
    }

    #[test]
    fn greedy_on_zero_rates_is_empty() {
        let inst = Instance::new(2, vec![5.0], 5.0, vec![vec![1.0]], vec![vec![vec![0.0, 0.0]]]).unwrap();
        let r = matroid_greedy(&inst).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.allocation.assignment.is_empty());
    }

    #[test]
    fn fast_fill_value_matches_waterfill() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let inst = CorpusParams::default().multi_ru(&mut rng, 2);
            let (r, _) = matroid_greedy_traced(&inst, Exec::Parallel).unwrap();
            let s = TripleSet::from_assignment(&r.allocation.assignment);
            assert!((submodular_value(&inst, &s).unwrap() - r.objective).abs() < 1e-12);
        }
    }

    #[test]
    fn gk_counterexample_close_to_lp() {
        let inst = counterexample(7.0);
        let f = gk_fractional(&inst, 0.05).unwrap();
        assert!(fractional_feasible(&inst, &f));
        assert!(f.objective >= 0.9 * 5.0 && f.objective <= 5.0 + 1e-6, "{}", f.objective);
    }

    #[test]
    fn gk_huge_capacity_reaches_pf_bound() {
        let inst = counterexample(1e9);
        let f = gk_fractional(&inst, 0.05).unwrap();
        assert!(f.objective >= 0.9 * 8.0 && f.objective <= 8.0 + 1e-6);
    }

    #[test]
    fn gk_single_triple() {
        let inst = Instance::new(1, vec![f64::INFINITY], 10.0, vec![vec![1.0]], vec![vec![vec![3.0]]]).unwrap();
        let f = gk_fractional(&inst, 0.1).unwrap();
        assert!((f.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gk_parameter_errors() {
        let inst = counterexample(7.0);
        assert!(gk_fractional(&inst, 0.5).is_err());
        assert!(gk_fractional(&inst, 0.0).is_err());
        let zero_w = inst.with_weights(vec![1.0, 0.0]).unwrap();
        assert!(gk_fractional(&zero_w, 0.1).is_err());
    }

    #[test]
    fn integral_fraction_rounds_to_itself() {
        let inst = counterexample(7.0);
        let frac_rlp = solve_rlp(&SingleCellInstance::from_instance(&inst).unwrap()).unwrap();
        let frac = GeneralFractional { x: frac_rlp.x.clone(), objective: frac_rlp.lp_value, alpha: 1.0, iterations: 0 };
        for seed in 0..5 {
            let r = randomized_round(&inst, &frac, 1.0, seed).unwrap();
            for k in 0..4 {
                let want = (0..2).find(|&j| frac_rlp.x(j, k) == 1.0);
                assert_eq!(r.allocation.assignment.get(0, k), want);
            }
            assert_eq!(r.objective, 5.0);
        }
    }

    #[test]
    fn half_half_slot_is_balanced() {
        let inst = Instance::new(1, vec![f64::INFINITY], 100.0, vec![vec![1.0, 1.0]], vec![vec![vec![1.0], vec![1.0]]])
            .unwrap();
        let frac = GeneralFractional { x: vec![0.5, 0.5], objective: 1.0, alpha: 1.0, iterations: 0 };
        let mut first = 0;
        for seed in 0..10_000 {
            let r = randomized_round(&inst, &frac, 1.0, seed).unwrap();
            if r.allocation.assignment.get(0, 0) == Some(0) {
                first += 1;
            }
        }
        assert!((first as i64 - 5000).abs() <= 200, "{first}");
    }

    #[test]
    fn rounding_rejects_bad_probabilities() {
        let inst = Instance::new(1, vec![f64::INFINITY], 100.0, vec![vec![1.0, 1.0]], vec![vec![vec![1.0], vec![1.0]]])
            .unwrap();
        let frac = GeneralFractional { x: vec![0.7, 0.7], objective: 1.4, alpha: 1.0, iterations: 0 };
        assert!(randomized_round(&inst, &frac, 1.0, 0).is_err());
        let frac = GeneralFractional { x: vec![1.5, 0.0], objective: 1.5, alpha: 1.0, iterations: 0 };
        assert!(randomized_round(&inst, &frac, 1.0, 0).is_err());
    }

    #[test]
    fn rounded_outputs_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..30 {
            let inst = CorpusParams::default().multi_ru(&mut rng, 2);
            let r = rounding(&inst, 0.1, 0.9, seed).unwrap();
            assert!((objective_of(&inst, &r.allocation).unwrap() - r.objective).abs() < 1e-12);
        }
    }
}
