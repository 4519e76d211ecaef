//! Randomized self-check: every solver against the oracle and the ratio
//! guarantees. Instance `n` is generated from seed `seed + n`.

use ponsched::general::matroid_greedy;
use ponsched::model::{quantize, CorpusParams};
use ponsched::par::{self, Exec};
use ponsched::singlecell::{dp_capacity, dual_upper_bound, half_approx_almost_discrete, rounding_ad, sample_lambdas, solve_rlp};
use ponsched::solver::{solve, SolverId, SolverParams};
use ponsched::{brute_force_oracle, check_feasible};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
struct Ratios {
    rounding_ad: f64,
    half_approx: f64,
    matroid: f64,
}

fn check(seed: u64, corpus: &CorpusParams, epsilon: f64) -> Result<Ratios, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = corpus.single_cell(&mut rng);
    let inst = cell.as_instance();
    let fail = |what: String| Err(format!("seed {seed}: {what}"));
    let opt = brute_force_oracle(inst).map_err(|e| e.to_string())?.objective;
    let tol = 1e-9 * opt.max(1.0);
    let params = SolverParams { quantum: Some(1.0), epsilon, seed, ..Default::default() };
    for id in SolverId::ALL {
        let r = solve(id, inst, &params).map_err(|e| format!("seed {seed}: {id}: {e}"))?;
        if !check_feasible(inst, &r.allocation).map_err(|e| e.to_string())?.is_feasible() {
            return fail(format!("{id} infeasible"));
        }
        if r.objective > opt + tol {
            return fail(format!("{id} {} above optimum {opt}", r.objective));
        }
    }
    let dp = dp_capacity(&quantize(&cell, 1.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.0.objective;
    if (dp - opt).abs() > tol {
        return fail(format!("dp {dp} != optimum {opt}"));
    }
    let frac = solve_rlp(&cell).map_err(|e| e.to_string())?;
    if frac.fractional_rbs.len() > 1 {
        return fail(format!("lp vertex has fractional RBs {:?}", frac.fractional_rbs));
    }
    if frac.lp_value < opt - tol {
        return fail(format!("lp {} below optimum {opt}", frac.lp_value));
    }
    for l in sample_lambdas(&cell, 20) {
        let d = dual_upper_bound(&cell, l).map_err(|e| e.to_string())?;
        if d < frac.lp_value - tol {
            return fail(format!("dual bound {d} at λ={l} below lp {}", frac.lp_value));
        }
    }
    let ad = rounding_ad(&cell).map_err(|e| e.to_string())?.objective;
    if ad < 0.5 * opt - tol || ad < 0.5 * frac.lp_value - tol {
        return fail(format!("rounding-ad {ad} below half of optimum {opt} / lp {}", frac.lp_value));
    }
    let eps_half = epsilon.min(0.49);
    let half = half_approx_almost_discrete(&cell, eps_half).map_err(|e| e.to_string())?.objective;
    if half < (0.5 - eps_half) * opt - tol {
        return fail(format!("half-approx {half} below (1/2 - ε)·{opt}"));
    }

    let two = corpus.multi_ru(&mut rng, 2);
    let opt2 = brute_force_oracle(&two).map_err(|e| e.to_string())?.objective;
    let greedy = matroid_greedy(&two).map_err(|e| e.to_string())?.objective;
    if greedy < 0.5 * opt2 - 1e-9 * opt2.max(1.0) {
        return fail(format!("matroid greedy {greedy} below half of {opt2}"));
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    Ok(Ratios { rounding_ad: ratio(ad, opt), half_approx: ratio(half, opt), matroid: ratio(greedy, opt2) })
}

/// Returns the number of failing instances.
pub fn run(count: usize, seed: u64, max_users: usize, max_rbs: usize, epsilon: f64) -> usize {
    let corpus = CorpusParams { max_users: max_users.max(1), max_rbs: max_rbs.max(1), ..Default::default() };
    let results = par::map_range(Exec::default(), count, |n| check(seed.wrapping_add(n as u64), &corpus, epsilon));
    let mut failures = 0;
    let mut min = Ratios { rounding_ad: 1.0, half_approx: 1.0, matroid: 1.0 };
    for r in results {
        match r {
            Ok(r) => {
                min.rounding_ad = min.rounding_ad.min(r.rounding_ad);
                min.half_approx = min.half_approx.min(r.half_approx);
                min.matroid = min.matroid.min(r.matroid);
            }
            Err(e) => {
                failures += 1;
                println!("FAIL {e}");
            }
        }
    }
    println!("instances: {count}, failures: {failures}");
    if count == 0 {
        println!("empty corpus: nothing checked");
    } else {
        println!("min rounding-ad/optimum: {:.4}", min.rounding_ad);
        println!("min half-approx/optimum: {:.4}", min.half_approx);
        println!("min matroid-greedy/optimum (two RUs, both capacities binding): {:.4}", min.matroid);
    }
    failures
}
