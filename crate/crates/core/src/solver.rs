//! Solvers addressable by name, as used by the simulator and the CLI.
//!
//! Single-cell solvers accept any instance whose RU capacities are redundant
//! (see [`Flattened`]); their allocation is lifted back onto the source
//! instance before it is returned.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::general::{matroid_greedy_with, rounding};
use crate::heuristics::{max_value, max_yield, proportional_fair};
use crate::model::{brute_force_oracle_with, Flattened, Instance, SingleCellInstance, SolveResult, DEFAULT_ENUM_BUDGET};
use crate::par::Exec;
use crate::singlecell::{dp_optimal, usable_capacity, fptas_discrete, half_approx_almost_discrete, rounding_ad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverId {
    MaxYield,
    MaxValue,
    Pf,
    RoundingAd,
    Dp,
    Fptas,
    HalfApprox,
    MatroidGreedy,
    Rounding,
    Oracle,
}

impl SolverId {
    pub const ALL: [SolverId; 10] = [
        SolverId::MaxYield,
        SolverId::MaxValue,
        SolverId::Pf,
        SolverId::RoundingAd,
        SolverId::Dp,
        SolverId::Fptas,
        SolverId::HalfApprox,
        SolverId::MatroidGreedy,
        SolverId::Rounding,
        SolverId::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverId::MaxYield => "max-yield",
            SolverId::MaxValue => "max-value",
            SolverId::Pf => "pf",
            SolverId::RoundingAd => "rounding-ad",
            SolverId::Dp => "dp",
            SolverId::Fptas => "fptas",
            SolverId::HalfApprox => "half-approx",
            SolverId::MatroidGreedy => "matroid-greedy",
            SolverId::Rounding => "rounding",
            SolverId::Oracle => "oracle",
        }
    }

    /// Whether the solver only handles a total-capacity constraint.
    pub fn single_cell(self) -> bool {
        matches!(self, SolverId::RoundingAd | SolverId::Dp | SolverId::Fptas | SolverId::HalfApprox)
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match norm.as_str() {
            "dp-capacity" => "dp",
            "half-approx-almost-discrete" => "half-approx",
            "fptas-discrete" => "fptas",
            "brute-force" => "oracle",
            other => other,
        };
        SolverId::ALL
            .into_iter()
            .find(|id| id.name() == alias)
            .ok_or_else(|| {
                let known: Vec<_> = SolverId::ALL.iter().map(|id| id.name()).collect();
                Error::Config(format!("unknown solver '{s}' (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// DP quantum; `None` picks `min(C, Σ_k max_j γ_jk) / dp_levels`.
    pub quantum: Option<f64>,
    pub dp_levels: u64,
    pub epsilon: f64,
    pub shrink: f64,
    pub seed: u64,
    pub enum_budget: u128,
    pub exec: Exec,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            quantum: None,
            dp_levels: 10_000,
            epsilon: 0.1,
            shrink: 0.9,
            seed: 0,
            enum_budget: DEFAULT_ENUM_BUDGET,
            exec: Exec::default(),
        }
    }
}

impl SolverParams {
    fn quantum_for(&self, cell: &SingleCellInstance) -> f64 {
        self.quantum.unwrap_or_else(|| {
            let c = usable_capacity(cell);
            if c > 0.0 {
                c / self.dp_levels.max(1) as f64
            } else {
                1.0
            }
        })
    }
}

pub fn solve(id: SolverId, inst: &Instance, params: &SolverParams) -> Result<SolveResult> {
    if id.single_cell() {
        let flat = Flattened::new(inst)?;
        let res = match id {
            SolverId::RoundingAd => rounding_ad(&flat.cell)?,
            SolverId::Dp => dp_optimal(&flat.cell, params.quantum_for(&flat.cell))?,
            SolverId::Fptas => fptas_discrete(&flat.cell, params.epsilon)?,
            SolverId::HalfApprox => half_approx_almost_discrete(&flat.cell, params.epsilon)?,
            _ => unreachable!(),
        };
        let alloc = flat.lift(inst, &res.allocation);
        let mut out = SolveResult::new(inst, alloc)?;
        out.meta = res.meta;
        return Ok(out);
    }
    match id {
        SolverId::MaxYield => max_yield(inst),
        SolverId::MaxValue => max_value(inst),
        SolverId::Pf => proportional_fair(inst),
        SolverId::MatroidGreedy => matroid_greedy_with(inst, params.exec),
        SolverId::Rounding => rounding(inst, params.epsilon.min(0.49), params.shrink, params.seed),
        SolverId::Oracle => brute_force_oracle_with(inst, params.enum_budget, params.exec),
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::counterexample;

    #[test]
    fn names_round_trip() {
        for id in SolverId::ALL {
            assert_eq!(id.to_string().parse::<SolverId>().unwrap(), id);
        }
        assert_eq!("dp_capacity".parse::<SolverId>().unwrap(), SolverId::Dp);
        assert!("simplex".parse::<SolverId>().is_err());
    }

    #[test]
    fn counterexample_through_registry() {
        let inst = counterexample(7.0);
        let p = SolverParams { quantum: Some(1.0), ..Default::default() };
        let got = |id| solve(id, &inst, &p).unwrap().objective;
        assert_eq!(got(SolverId::MaxYield), 3.5);
        assert_eq!(got(SolverId::MaxValue), 4.0);
        assert_eq!(got(SolverId::Dp), 5.0);
        assert_eq!(got(SolverId::RoundingAd), 5.0);
        assert_eq!(got(SolverId::MatroidGreedy), 4.5);
        assert_eq!(got(SolverId::Oracle), 5.0);
    }

    #[test]
    fn single_cell_solvers_flatten_redundant_rus() {
        let inst = Instance::new(
            2,
            vec![f64::INFINITY, 50.0],
            6.0,
            vec![vec![1.0, 0.5], vec![0.8]],
            vec![vec![vec![1.0, 2.0], vec![4.0, 4.0]], vec![vec![3.0, 1.0]]],
        )
        .unwrap();
        let p = SolverParams { quantum: Some(1.0), ..Default::default() };
        let oracle = solve(SolverId::Oracle, &inst, &p).unwrap().objective;
        let dp = solve(SolverId::Dp, &inst, &p).unwrap().objective;
        assert!((dp - oracle).abs() < 1e-9, "{dp} vs {oracle}");
        assert!(solve(SolverId::RoundingAd, &inst, &p).unwrap().objective >= 0.5 * oracle);
    }

    #[test]
    fn default_dp_quantum_follows_usable_capacity() {
        let inst = counterexample(1e12);
        let dp = solve(SolverId::Dp, &inst, &SolverParams::default()).unwrap();
        assert_eq!(dp.objective, 8.0);
    }

    #[test]
    fn single_cell_solver_rejects_binding_ru_capacity() {
        let inst = Instance::new(1, vec![1.0, 1.0], 5.0, vec![vec![1.0], vec![1.0]], vec![vec![vec![2.0]], vec![vec![2.0]]])
            .unwrap();
        assert!(solve(SolverId::Dp, &inst, &SolverParams::default()).is_err());
    }
}
