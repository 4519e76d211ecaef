//! Weak-duality certificates for the LP relaxation.
//!
//! For a capacity price `λ ≥ 0`, `μ_j = max(0, w_j − λ)` and
//! `z_k = max_j γ_jk μ_j` form a feasible dual point, so
//! `Σ_k z_k + λ C` bounds the relaxation (and hence every allocation) from above.

use crate::error::{Error, Result};
use crate::model::SingleCellInstance;

pub fn dual_upper_bound(cell: &SingleCellInstance, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    let mut bound = lambda * cell.capacity();
    for k in 0..cell.rb_count() {
        let z = (0..cell.users())
            .map(|j| cell.gamma(j, k) * (cell.weight(j) - lambda).max(0.0))
            .fold(0.0, f64::max);
        bound += z;
    }
    Ok(bound)
}

/// Exact minimum of the bound over `λ`. The bound is convex and piecewise
/// linear in `λ`, so the minimum sits at `λ = 0`, at some `w_j`, or where two
/// users' lines `γ_jk (w_j − λ)` cross on some RB.
pub fn dual_min_bound(cell: &SingleCellInstance) -> (f64, f64) {
    let mut candidates = vec![0.0];
    for j in 0..cell.users() {
        candidates.push(cell.weight(j));
    }
    for k in 0..cell.rb_count() {
        for a in 0..cell.users() {
            for b in a + 1..cell.users() {
                let (ga, gb) = (cell.gamma(a, k), cell.gamma(b, k));
                if ga != gb {
                    let l = (ga * cell.weight(a) - gb * cell.weight(b)) / (ga - gb);
                    if l > 0.0 && l.is_finite() {
                        candidates.push(l);
                    }
                }
            }
        }
    }
    candidates
        .into_iter()
        .map(|l| (l, dual_upper_bound(cell, l).expect("candidate is valid")))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .expect("at least λ = 0")
}

/// `count` prices spread over `[0, 1.25 · max_j w_j]`, always including `0`
/// and each `w_j`.
pub fn sample_lambdas(cell: &SingleCellInstance, count: usize) -> Vec<f64> {
    let w_max = (0..cell.users()).map(|j| cell.weight(j)).fold(0.0, f64::max);
    let mut out: Vec<f64> = std::iter::once(0.0).chain((0..cell.users()).map(|j| cell.weight(j))).collect();
    let grid = count.saturating_sub(out.len()).max(1);
    for s in 1..=grid {
        out.push(1.25 * w_max * s as f64 / grid as f64);
    }
    out.truncate(count.max(1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::counterexample;

    fn counterexample_cell() -> SingleCellInstance {
        SingleCellInstance::from_instance(&counterexample(7.0)).unwrap()
    }

    #[test]
    fn counterexample_bound_is_tight_at_one_third() {
        let b = dual_upper_bound(&counterexample_cell(), 1.0 / 3.0).unwrap();
        assert!((b - 5.0).abs() < 1e-12);
        let (l, m) = dual_min_bound(&counterexample_cell());
        assert!((m - 5.0).abs() < 1e-12);
        assert!((l - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn saturated_and_zero_prices() {
        let cell = counterexample_cell();
        assert_eq!(dual_upper_bound(&cell, 1.0).unwrap(), 7.0);
        assert_eq!(dual_upper_bound(&cell, 3.0).unwrap(), 21.0);
        assert_eq!(dual_upper_bound(&cell, 0.0).unwrap(), 8.0);
        assert!(dual_upper_bound(&cell, -0.1).is_err());
    }

    #[test]
    fn samples_include_breakpoints() {
        let l = sample_lambdas(&counterexample_cell(), 20);
        assert_eq!(l.len(), 20);
        assert!(l.contains(&0.0) && l.contains(&1.0) && l.contains(&0.5));
    }
}
