use std::path::Path;

use super::{build_network, SimConfig, SimState};
use crate::error::{Error, Result};
use crate::model::{Instance, SolveResult};
use crate::par;
use crate::solver::{solve, SolverId, SolverParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    pub solver: SolverId,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    pub user: usize,
    pub ru: usize,
    pub avg_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutput {
    pub slots: Vec<SlotRecord>,
    pub users: Vec<UserRecord>,
}

/// What an observer sees after each slot's solves, before `R` is updated.
pub struct SlotView<'a> {
    pub slot: u64,
    pub measured: bool,
    pub state: &'a SimState,
    pub instance: &'a Instance,
    pub driver: &'a SolveResult,
    pub evaluated: &'a [(SolverId, SolveResult)],
}

/// Runs warm-up plus measured slots. Every slot the driver schedules and its
/// allocation alone updates the smoothed rates; during measured slots each
/// evaluated solver is run on the same `(γ, w)` and its objective recorded.
pub fn run_episode(config: &SimConfig, solvers: &[SolverId], driver: SolverId, params: &SolverParams) -> Result<EpisodeOutput> {
    run_episode_with(config, solvers, driver, params, |_| {})
}

pub fn run_episode_with<F>(
    config: &SimConfig,
    solvers: &[SolverId],
    driver: SolverId,
    params: &SolverParams,
    mut observe: F,
) -> Result<EpisodeOutput>
where
    F: FnMut(&SlotView<'_>),
{
    let mut state = build_network(config)?;
    let mut evaluated_ids: Vec<SolverId> = Vec::new();
    for &id in solvers {
        if !evaluated_ids.contains(&id) {
            evaluated_ids.push(id);
        }
    }
    let users = config.user_count;
    let mut delivered_sum = vec![0.0; users];
    let mut slots = Vec::new();
    let total = (config.warmup_slots + config.measure_slots) as u64;
    for t in 0..total {
        let measured = t >= config.warmup_slots as u64;
        let inst = state.instance(params.exec)?;
        let slot_params = SolverParams { seed: params.seed.wrapping_add(t), ..*params };
        let driven = solve(driver, &inst, &slot_params).map_err(|e| at_slot(t, driver, e))?;
        let mut evaluated = Vec::new();
        if measured {
            let others: Vec<SolverId> = evaluated_ids.iter().copied().filter(|&id| id != driver).collect();
            let results = par::map(params.exec, &others, |&id| solve(id, &inst, &slot_params).map_err(|e| at_slot(t, id, e)));
            let mut results = others.into_iter().zip(results);
            for &id in &evaluated_ids {
                let res = if id == driver {
                    driven.clone()
                } else {
                    let (_, r) = results.next().expect("one result per solver");
                    r?
                };
                slots.push(SlotRecord { slot: t, solver: id, objective: res.objective });
                evaluated.push((id, res));
            }
        }
        let delivered = state.delivered(&inst, &driven.allocation);
        observe(&SlotView { slot: t, measured, state: &state, instance: &inst, driver: &driven, evaluated: &evaluated });
        if measured {
            for (s, d) in delivered_sum.iter_mut().zip(&delivered) {
                *s += d;
            }
        }
        state.advance(&delivered);
    }
    let denom = config.measure_slots.max(1) as f64;
    let users = (0..users)
        .map(|u| UserRecord { user: u, ru: state.association()[u], avg_rate_bps: delivered_sum[u] / denom })
        .collect();
    Ok(EpisodeOutput { slots, users })
}

fn at_slot(t: u64, id: SolverId, e: Error) -> Error {
    match e {
        Error::Budget { .. } => e,
        other => Error::Config(format!("solver {id} failed at slot {t}: {other}")),
    }
}

impl EpisodeOutput {
    pub fn slots_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["slot", "solver", "objective"]).expect("in-memory write");
        for r in &self.slots {
            w.write_record([r.slot.to_string(), r.solver.to_string(), r.objective.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn users_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["user", "ru", "avg_rate_bps"]).expect("in-memory write");
        for r in &self.users {
            w.write_record([r.user.to_string(), r.ru.to_string(), r.avg_rate_bps.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Writes `slots.csv` and `users.csv` into `dir`, creating it if needed.
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("slots.csv"), self.slots_csv())?;
        std::fs::write(dir.join("users.csv"), self.users_csv())?;
        Ok(())
    }

    /// Objectives of one solver in slot order.
    pub fn objectives(&self, id: SolverId) -> Vec<f64> {
        self.slots.iter().filter(|r| r.solver == id).map(|r| r.objective).collect()
    }
}
