use super::dp::profit_dp;
use super::{best_single_rb, DEFAULT_TABLE_BUDGET};
use crate::alloc::waterfill;
use crate::error::{Error, Result};
use crate::model::{Allocation, Assignment, SingleCellInstance, SolveResult};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Profit-scaling approximation for the Discrete problem (each chosen RB at
/// its full rate, rates clamped to `C`). Profits `p_jk = w_j min(γ_jk, C)` are
/// scaled to `⌊p_jk / W⌋` with `W = ε p_max / (K − 1)` and solved exactly by
/// the profit DP; the result is within `1 − ε` of the Discrete optimum.
pub fn fptas_discrete(cell: &SingleCellInstance, epsilon: f64) -> Result<SolveResult> {
    check_epsilon(epsilon)?;
    let inst = cell.as_instance();
    let c = cell.capacity();
    let kappa = cell.rb_count();
    let clamped = |j: usize, k: usize| cell.gamma(j, k).min(c);
    let profit = |j: usize, k: usize| cell.weight(j) * clamped(j, k);
    let p_max = (0..cell.users())
        .flat_map(|j| (0..kappa).map(move |k| (j, k)))
        .map(|(j, k)| profit(j, k))
        .fold(0.0, f64::max);

    if kappa == 1 || p_max <= 0.0 {
        // one RB: the exact answer is the best single user on it
        let (v, alloc) = best_single_rb(cell);
        return Ok(SolveResult::new(inst, alloc)?.with_meta("profit", v).with_meta("scale", 0.0));
    }

    let scale = epsilon * p_max / (kappa - 1) as f64;
    let scaled = |j: usize, k: usize| (profit(j, k) / scale).floor() as u64;
    let sol = profit_dp(cell.users(), kappa, clamped, scaled, c, DEFAULT_TABLE_BUDGET)?;
    let mut assignment = Assignment::empty(inst);
    for &(j, k) in &sol.chosen {
        assignment.set(0, k, Some(j));
    }
    let alloc: Allocation = waterfill(inst, &assignment);
    Ok(SolveResult::new(inst, alloc)?
        .with_meta("scaled_profit", sol.profit as f64)
        .with_meta("scale", scale)
        .with_meta("p_max", p_max)
        .with_meta("table_cells", ((kappa + 1) * (sol.table.max_profit() + 1)) as f64))
}

/// `(1/2 − ε)`-approximation for the full problem: the better of the Discrete
/// FPTAS and the best single RB.
pub fn half_approx_almost_discrete(cell: &SingleCellInstance, epsilon: f64) -> Result<SolveResult> {
    let discrete = fptas_discrete(cell, epsilon)?;
    let (single_value, single) = best_single_rb(cell);
    if single_value > discrete.objective {
        Ok(SolveResult::new(cell.as_instance(), single)?.with_meta("single_rb_branch", 1.0))
    } else {
        Ok(discrete.with_meta("single_rb_branch", 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{brute_force_oracle, counterexample, quantize, CorpusParams};
    use crate::singlecell::dp_profit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn counterexample_cell() -> SingleCellInstance {
        SingleCellInstance::from_instance(&counterexample(7.0)).unwrap()
    }

    #[test]
    fn counterexample_fptas_and_half_approx() {
        let r = fptas_discrete(&counterexample_cell(), 0.1).unwrap();
        assert!(r.objective >= 4.5);
        assert_eq!(r.objective, 5.0);
        let h = half_approx_almost_discrete(&counterexample_cell(), 0.1).unwrap();
        assert_eq!(h.objective, 5.0);
    }

    #[test]
    fn epsilon_out_of_range() {
        for e in [0.0, 1.0, -0.5, 2.0, f64::NAN] {
            assert!(matches!(fptas_discrete(&counterexample_cell(), e), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn single_rb_instances() {
        let cell = SingleCellInstance::new(1, 7.0, vec![1.0, 3.0], vec![vec![9.0], vec![2.0]]).unwrap();
        assert_eq!(fptas_discrete(&cell, 0.3).unwrap().objective, 7.0);
    }

    #[test]
    fn dominant_rb_wins_single_branch() {
        // one huge-rate RB fills capacity alone
        let cell = SingleCellInstance::new(3, 10.0, vec![1.0, 0.1], vec![vec![50.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]])
            .unwrap();
        let h = half_approx_almost_discrete(&cell, 0.25).unwrap();
        assert_eq!(h.objective, 10.0);
        let f = fptas_discrete(&cell, 0.25).unwrap();
        assert!(f.objective >= 0.75 * 10.0);
    }

    #[test]
    fn fptas_ratio_against_exact_discrete() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = CorpusParams { integer_weights: true, ..CorpusParams::default() };
        for _ in 0..150 {
            let cell = params.single_cell(&mut rng);
            let q = quantize(&cell, 1.0).unwrap();
            let profits: Vec<Vec<u64>> = (0..q.users())
                .map(|j| (0..q.rb_count()).map(|k| (q.weight(j) * q.gamma(j, k) as f64) as u64).collect())
                .collect();
            let (exact, _) = dp_profit(&q, &profits).unwrap();
            let oracle = brute_force_oracle(cell.as_instance()).unwrap().objective;
            for eps in [0.1, 0.3, 0.5] {
                let f = fptas_discrete(&cell, eps).unwrap();
                assert!(f.objective >= (1.0 - eps) * exact.objective - 1e-9);
                let h = half_approx_almost_discrete(&cell, eps.min(0.25)).unwrap();
                assert!(h.objective >= (0.5 - eps.min(0.25)) * oracle - 1e-9);
            }
        }
    }
}
