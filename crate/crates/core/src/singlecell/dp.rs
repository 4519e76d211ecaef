//! Pseudo-polynomial dynamic programs.
//!
//! `dp_capacity` indexes by remaining capacity and is exact for
//! integer data. `dp_profit` indexes by profit and returns the best
//! Discrete solution, every chosen RB filled to its full rate.

use std::collections::VecDeque;

use super::{prune_zero_rates, DEFAULT_TABLE_BUDGET};
use crate::alloc::{pf_certificate, waterfill};
use crate::error::{Error, Result};
use crate::model::{quantize, tol_for, Assignment, QuantizedInstance, SingleCellInstance, SolveResult};

const NONE: u32 = u32::MAX;

/// `V(M, k)`: best objective from the first `k` RBs with capacity `M`, in
/// units of weight × quantum steps.
#[derive(Debug, Clone)]
pub struct DpTable {
    capacity: usize,
    rb_count: usize,
    values: Vec<f64>,
    choice: Vec<(u32, u32)>,
}

impl DpTable {
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn rb_count(&self) -> usize {
        self.rb_count
    }

    pub fn value(&self, m: usize, k: usize) -> f64 {
        self.values[k * (self.capacity + 1) + m]
    }

    /// `(user, rate)` chosen for RB `k - 1` in cell `(M, k)`; `None` if skipped.
    pub fn choice(&self, m: usize, k: usize) -> Option<(usize, u64)> {
        let (j, y) = self.choice[k * (self.capacity + 1) + m];
        (j != NONE).then_some((j as usize, y as u64))
    }
}

pub fn dp_capacity(q: &QuantizedInstance) -> Result<(SolveResult, DpTable)> {
    dp_capacity_with_budget(q, DEFAULT_TABLE_BUDGET)
}

/// Fills `V(M, k) = max_j max_{y ≤ min(γ'_jk, M)} w_j y + V(M − y, k − 1)`.
///
/// For fixed `(j, k)` the inner maximum is a sliding-window maximum of
/// `V(t, k − 1) − w_j t` over `t ∈ [M − γ', M − 1]`, kept in a monotone deque,
/// so a row costs `O(n·C')` instead of `O(n·C'·γ_max)`.
pub fn dp_capacity_with_budget(q: &QuantizedInstance, budget: u128) -> Result<(SolveResult, DpTable)> {
    let cap = q.capacity();
    let kappa = q.rb_count();
    let cells = (cap as u128 + 1) * (kappa as u128 + 1);
    if cells > budget {
        return Err(Error::Budget { what: "capacity DP table (use a larger quantum or the FPTAS)", required: cells, budget });
    }
    if q.gamma_max() > u32::MAX as u64 - 1 || q.users() >= NONE as usize {
        return Err(Error::Parameter("quantized instance too large for the DP".into()));
    }
    let cap = cap as usize;
    let width = cap + 1;
    let mut values = vec![0.0; (kappa + 1) * width];
    let mut choice = vec![(NONE, 0u32); (kappa + 1) * width];
    let mut window: VecDeque<(usize, f64)> = VecDeque::new();
    for k in 1..=kappa {
        let (done, rest) = values.split_at_mut(k * width);
        let prev = &done[(k - 1) * width..];
        let cur = &mut rest[..width];
        cur.copy_from_slice(prev);
        let cur_choice = &mut choice[k * width..(k + 1) * width];
        for j in 0..q.users() {
            let g = q.gamma(j, k - 1) as usize;
            let w = q.weight(j);
            if g == 0 || w <= 0.0 {
                continue;
            }
            window.clear();
            for m in 1..=cap {
                let t = m - 1;
                let score = prev[t] - w * t as f64;
                while window.back().is_some_and(|&(_, s)| s <= score) {
                    window.pop_back();
                }
                window.push_back((t, score));
                while window.front().is_some_and(|&(ft, _)| ft + g < m) {
                    window.pop_front();
                }
                let (t_best, _) = *window.front().expect("window holds t = m - 1");
                let y = m - t_best;
                let cand = w * y as f64 + prev[t_best];
                if cand > cur[m] {
                    cur[m] = cand;
                    cur_choice[m] = (j as u32, y as u32);
                }
            }
        }
    }
    let table = DpTable { capacity: cap, rb_count: kappa, values, choice };

    let cell = q.dequantized();
    let inst = cell.as_instance();
    let mut assignment = Assignment::empty(inst);
    let mut m = cap;
    for k in (1..=kappa).rev() {
        if let Some((j, y)) = table.choice(m, k) {
            assignment.set(0, k - 1, Some(j));
            m -= y as usize;
        }
    }
    // Rates for the chosen assignment come from water-filling, which leaves at
    // most one RB partially filled.
    let mut alloc = waterfill(inst, &assignment);
    prune_zero_rates(inst, &mut alloc);
    let dp_value = table.value(cap, kappa) * q.quantum();
    let result = SolveResult::new(inst, alloc)?
        .with_meta("dp_value", dp_value)
        .with_meta("table_cells", cells as f64)
        .with_meta("quantum", q.quantum());
    Ok((result, table))
}

/// Quantize, solve exactly on the quantized data, then re-derive the rates of
/// the chosen assignment on the original rates.
///
/// Capacity beyond `Σ_k max_j γ_jk` can never be used, so it is cut off first;
/// this keeps the table small when the capacity does not bind. When the
/// full-rate PF allocation already fits it is optimal and returned as is.
pub fn dp_optimal(cell: &SingleCellInstance, quantum: f64) -> Result<SolveResult> {
    if let Some(alloc) = pf_certificate(cell.as_instance()) {
        return Ok(SolveResult::new(cell.as_instance(), alloc)?.with_meta("certified", 1.0));
    }
    let usable = usable_capacity(cell);
    let q = if usable < cell.capacity() {
        quantize(&cell.with_capacity(usable)?, quantum)?
    } else {
        quantize(cell, quantum)?
    };
    let (res, _) = dp_capacity(&q)?;
    let inst = cell.as_instance();
    let mut alloc = waterfill(inst, &res.allocation.assignment);
    prune_zero_rates(inst, &mut alloc);
    let mut out = SolveResult::new(inst, alloc)?;
    out.meta = res.meta;
    Ok(out)
}

/// `min(C, Σ_k max_j γ_jk)`: the most capacity any allocation can use.
pub fn usable_capacity(cell: &SingleCellInstance) -> f64 {
    let demand: f64 = (0..cell.rb_count())
        .map(|k| (0..cell.users()).map(|j| cell.gamma(j, k)).fold(0.0, f64::max))
        .sum();
    demand.min(cell.capacity())
}

/// `Cmin(k, p)`: least capacity giving profit exactly `p` from the first `k`
/// RBs, `+∞` if unreachable.
#[derive(Debug, Clone)]
pub struct ProfitTable {
    rb_count: usize,
    max_profit: usize,
    cmin: Vec<f64>,
    choice: Vec<u32>,
}

impl ProfitTable {
    pub fn rb_count(&self) -> usize {
        self.rb_count
    }

    pub fn max_profit(&self) -> usize {
        self.max_profit
    }

    pub fn min_capacity(&self, k: usize, p: usize) -> f64 {
        self.cmin[k * (self.max_profit + 1) + p]
    }

    pub fn choice(&self, k: usize, p: usize) -> Option<usize> {
        let j = self.choice[k * (self.max_profit + 1) + p];
        (j != NONE).then_some(j as usize)
    }
}

/// Output of the profit-indexed DP: the table, the best reachable profit and
/// the chosen `(user, rb)` pairs.
pub(crate) struct ProfitSolution {
    pub table: ProfitTable,
    pub profit: u64,
    pub chosen: Vec<(usize, usize)>,
}

/// `Cmin(k, p) = min(Cmin(k−1, p), min_{j: p ≥ p_jk} Cmin(k−1, p − p_jk) + c_jk)`;
/// the answer is `max{p : Cmin(K, p) ≤ C}` by a backward scan.
pub(crate) fn profit_dp(
    users: usize,
    rb_count: usize,
    cost: impl Fn(usize, usize) -> f64,
    profit: impl Fn(usize, usize) -> u64,
    capacity: f64,
    budget: u128,
) -> Result<ProfitSolution> {
    let p_max = (0..users)
        .flat_map(|j| (0..rb_count).map(move |k| (j, k)))
        .map(|(j, k)| profit(j, k))
        .max()
        .unwrap_or(0);
    let total = (rb_count as u128) * (p_max as u128);
    let cells = (rb_count as u128 + 1) * (total + 1);
    if cells > budget {
        return Err(Error::Budget { what: "profit DP table", required: cells, budget });
    }
    let top = total as usize;
    let width = top + 1;
    let mut cmin = vec![f64::INFINITY; (rb_count + 1) * width];
    let mut choice = vec![NONE; (rb_count + 1) * width];
    cmin[0] = 0.0;
    for k in 1..=rb_count {
        let (done, rest) = cmin.split_at_mut(k * width);
        let prev = &done[(k - 1) * width..];
        let cur = &mut rest[..width];
        cur.copy_from_slice(prev);
        let cur_choice = &mut choice[k * width..(k + 1) * width];
        for j in 0..users {
            let pj = profit(j, k - 1) as usize;
            if pj == 0 {
                continue;
            }
            let cj = cost(j, k - 1);
            for p in pj..=top {
                let cand = prev[p - pj] + cj;
                if cand < cur[p] {
                    cur[p] = cand;
                    cur_choice[p] = j as u32;
                }
            }
        }
    }
    let table = ProfitTable { rb_count, max_profit: top, cmin, choice };
    let limit = capacity + tol_for(capacity);
    let best = (0..=top).rev().find(|&p| table.min_capacity(rb_count, p) <= limit).unwrap_or(0);
    let mut chosen = Vec::new();
    let mut p = best;
    for k in (1..=rb_count).rev() {
        if let Some(j) = table.choice(k, p) {
            chosen.push((j, k - 1));
            p -= profit(j, k - 1) as usize;
        }
    }
    debug_assert_eq!(p, 0);
    chosen.reverse();
    Ok(ProfitSolution { table, profit: best as u64, chosen })
}

/// Best Discrete solution for caller-supplied integer profits `profits[j][k]`.
pub fn dp_profit(q: &QuantizedInstance, profits: &[Vec<u64>]) -> Result<(SolveResult, ProfitTable)> {
    if profits.len() != q.users() || profits.iter().any(|r| r.len() != q.rb_count()) {
        return Err(Error::Structure("profit tensor shape does not match instance".into()));
    }
    let sol = profit_dp(
        q.users(),
        q.rb_count(),
        |j, k| q.gamma(j, k) as f64,
        |j, k| profits[j][k],
        q.capacity() as f64,
        DEFAULT_TABLE_BUDGET,
    )?;
    let cell = q.dequantized();
    let inst = cell.as_instance();
    let mut assignment = Assignment::empty(inst);
    for &(j, k) in &sol.chosen {
        assignment.set(0, k, Some(j));
    }
    let alloc = waterfill(inst, &assignment);
    let res = SolveResult::new(inst, alloc)?.with_meta("profit", sol.profit as f64);
    Ok((res, sol.table))
}

impl QuantizedInstance {
    pub fn gamma_max(&self) -> u64 {
        (0..self.users())
            .flat_map(|j| (0..self.rb_count()).map(move |k| (j, k)))
            .map(|(j, k)| self.gamma(j, k))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{brute_force_oracle, counterexample, CorpusParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn counterexample_q() -> QuantizedInstance {
        quantize(&SingleCellInstance::from_instance(&counterexample(7.0)).unwrap(), 1.0).unwrap()
    }

    fn check_table(t: &DpTable) {
        for m in 0..=t.capacity() {
            assert_eq!(t.value(m, 0), 0.0);
        }
        for k in 0..=t.rb_count() {
            for m in 0..=t.capacity() {
                if m > 0 {
                    assert!(t.value(m, k) >= t.value(m - 1, k));
                }
                if k > 0 {
                    assert!(t.value(m, k) >= t.value(m, k - 1));
                }
            }
        }
    }

    #[test]
    fn counterexample_dp_is_five() {
        let (r, t) = dp_capacity(&counterexample_q()).unwrap();
        assert_eq!(r.objective, 5.0);
        assert_eq!(t.value(7, 4), 5.0);
        check_table(&t);
    }

    /// Naive recursion without the sliding window.
    fn naive_v(q: &QuantizedInstance) -> f64 {
        let cap = q.capacity() as usize;
        let mut prev = vec![0.0; cap + 1];
        for k in 0..q.rb_count() {
            let mut cur = prev.clone();
            for m in 0..=cap {
                for j in 0..q.users() {
                    for y in 0..=(q.gamma(j, k) as usize).min(m) {
                        cur[m] = f64::max(cur[m], q.weight(j) * y as f64 + prev[m - y]);
                    }
                }
            }
            prev = cur;
        }
        prev[cap]
    }

    #[test]
    fn corpus_matches_oracle_and_naive_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = CorpusParams::default();
        for _ in 0..100 {
            let cell = params.single_cell(&mut rng);
            let q = quantize(&cell, 1.0).unwrap();
            let (r, t) = dp_capacity(&q).unwrap();
            check_table(&t);
            let oracle = brute_force_oracle(cell.as_instance()).unwrap().objective;
            assert!((r.objective - oracle).abs() <= 1e-9 * oracle.max(1.0));
            assert!((t.value(t.capacity(), t.rb_count()) - naive_v(&q)).abs() < 1e-9);
            // almost discrete: at most one RB strictly between 0 and γ
            let inst = q.dequantized();
            let partial = r
                .allocation
                .assignment
                .assigned()
                .filter(|&(_, j, k)| r.allocation.rate(inst.as_instance(), 0, j, k) < inst.gamma(j, k))
                .count();
            assert!(partial <= 1);
        }
    }

    #[test]
    fn dp_refuses_large_tables() {
        let cell = SingleCellInstance::new(1, 1e6, vec![1.0], vec![vec![5.0]]).unwrap();
        let q = quantize(&cell, 1.0).unwrap();
        assert!(matches!(dp_capacity_with_budget(&q, 1000), Err(Error::Budget { .. })));
    }

    #[test]
    fn dp_profit_counterexample() {
        let q = counterexample_q();
        let profits = vec![vec![1; 4], vec![2; 4]];
        let (r, t) = dp_profit(&q, &profits).unwrap();
        assert_eq!(r.meta("profit"), Some(5.0));
        assert_eq!(r.objective, 5.0);
        assert_eq!(t.min_capacity(0, 0), 0.0);
        assert!((1..=t.max_profit()).all(|p| t.min_capacity(0, p).is_infinite()));
        for p in 0..=t.max_profit() {
            for k in 1..=t.rb_count() {
                assert!(t.min_capacity(k, p) <= t.min_capacity(k - 1, p));
            }
        }
    }

    #[test]
    fn dp_profit_skips_unaffordable_rb() {
        // quantize clamps γ to C; build directly to exercise the skip branch
        let q = QuantizedInstance::from_parts(1, vec![0.5], vec![4], 3, 1.0).unwrap();
        let (r, _) = dp_profit(&q, &[vec![2]]).unwrap();
        assert_eq!(r.meta("profit"), Some(0.0));
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn dp_profit_shape_errors() {
        assert!(dp_profit(&counterexample_q(), &[vec![1; 4]]).is_err());
    }
}
