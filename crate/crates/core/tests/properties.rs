use ponsched::alloc::{pf_certificate, per_slot_bound};
use ponsched::heuristics::{max_value, max_yield};
use ponsched::model::{counterexample, quantize, weighted_sum, CorpusParams};
use ponsched::singlecell::{solve_rlp, dp_optimal};
use ponsched::solver::{solve, SolverId, SolverParams};
use ponsched::{brute_force_oracle, check_feasible, Instance, SingleCellInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> SolverParams {
    SolverParams { quantum: Some(1.0), epsilon: 0.1, ..Default::default() }
}

#[test]
fn every_solver_is_feasible_and_below_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let corpus = CorpusParams::default();
    for n in 0..120 {
        let inst = corpus.single_cell(&mut rng).into_instance();
        let opt = brute_force_oracle(&inst).unwrap().objective;
        for id in SolverId::ALL {
            let r = solve(id, &inst, &params()).unwrap();
            assert!(check_feasible(&inst, &r.allocation).unwrap().is_feasible(), "{id} on {n}");
            assert!(r.objective <= opt + 1e-9 * opt.max(1.0), "{id} on {n}: {} > {opt}", r.objective);
            assert!(r.objective >= 0.0);
        }
    }
    for n in 0..60 {
        let inst = corpus.multi_ru(&mut rng, 2);
        let opt = brute_force_oracle(&inst).unwrap().objective;
        for id in SolverId::ALL.into_iter().filter(|id| !id.single_cell()) {
            let r = solve(id, &inst, &params()).unwrap();
            assert!(check_feasible(&inst, &r.allocation).unwrap().is_feasible(), "{id} on {n}");
            assert!(r.objective <= opt + 1e-9 * opt.max(1.0));
        }
    }
}

#[test]
fn heuristics_do_not_dominate_each_other() {
    let low = counterexample(7.0);
    assert!(max_value(&low).unwrap().objective > max_yield(&low).unwrap().objective);
    let high = counterexample(100.0);
    assert!(max_yield(&high).unwrap().objective > max_value(&high).unwrap().objective);
}

#[test]
fn max_yield_is_optimal_when_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let corpus = CorpusParams { max_capacity: 40, ..Default::default() };
    let mut certified = 0;
    for _ in 0..200 {
        let inst = corpus.single_cell(&mut rng).into_instance();
        if pf_certificate(&inst).is_some() {
            certified += 1;
            let opt = brute_force_oracle(&inst).unwrap().objective;
            assert!((max_yield(&inst).unwrap().objective - opt).abs() <= 1e-9 * opt.max(1.0));
            assert!((per_slot_bound(&inst) - opt).abs() <= 1e-9 * opt.max(1.0));
        }
    }
    assert!(certified > 20);
}

#[test]
fn lp_relaxation_bounds_the_integral_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let cell = CorpusParams::default().single_cell(&mut rng);
        let lp = solve_rlp(&cell).unwrap().lp_value;
        let opt = brute_force_oracle(cell.as_instance()).unwrap().objective;
        assert!(lp >= opt - 1e-9);
    }
}

fn real_cell() -> impl Strategy<Value = SingleCellInstance> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, kappa)| {
        (
            proptest::collection::vec(proptest::collection::vec(0.0f64..6.0, kappa), n),
            proptest::collection::vec(0.05f64..2.0, n),
            0.0f64..14.0,
        )
            .prop_map(move |(g, w, c)| SingleCellInstance::new(kappa, c, w, g).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn quantization_loses_at_most_one_quantum_per_rb(cell in real_cell(), quantum in 0.2f64..1.5) {
        let q = quantize(&cell, quantum).unwrap();
        let coarse = brute_force_oracle(q.dequantized().as_instance()).unwrap().objective;
        let fine = brute_force_oracle(cell.as_instance()).unwrap().objective;
        let w_max = (0..cell.users()).map(|j| cell.weight(j)).fold(0.0, f64::max);
        prop_assert!(coarse <= fine + 1e-9);
        prop_assert!(fine <= coarse + quantum * cell.rb_count() as f64 * w_max + 1e-9);
        let dp = dp_optimal(&cell, quantum).unwrap().objective;
        prop_assert!(dp >= coarse - 1e-9 && dp <= fine + 1e-9);
    }

    #[test]
    fn objective_is_linear_in_rates(
        a in proptest::collection::vec(0.0f64..10.0, 8),
        b in proptest::collection::vec(0.0f64..10.0, 8),
    ) {
        let inst = counterexample(7.0);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = weighted_sum(&inst, &sum);
        let rhs = weighted_sum(&inst, &a) + weighted_sum(&inst, &b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
    }
}

#[test]
fn flattened_multi_ru_matches_oracle() {
    let inst = Instance::new(
        2,
        vec![f64::INFINITY, f64::INFINITY, 100.0],
        9.0,
        vec![vec![1.0, 0.4], vec![0.7], vec![0.3, 0.9]],
        vec![
            vec![vec![2.0, 3.0], vec![5.0, 5.0]],
            vec![vec![4.0, 1.0]],
            vec![vec![3.0, 3.0], vec![1.0, 2.0]],
        ],
    )
    .unwrap();
    let opt = brute_force_oracle(&inst).unwrap().objective;
    let dp = solve(SolverId::Dp, &inst, &params()).unwrap().objective;
    assert!((dp - opt).abs() <= 1e-9, "{dp} vs {opt}");
}
