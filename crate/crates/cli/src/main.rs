//! `ponsched`: solve instances, run the oracle, simulate, check corpora.

mod corpus;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ponsched::model::{brute_force_oracle_with, DEFAULT_ENUM_BUDGET};
use ponsched::sim::{run_episode, SimConfig};
use ponsched::solver::{solve, SolverId, SolverParams};
use ponsched::{check_feasible, objective_of, Allocation, Error, Exec, Instance, SolveResult};

const BUDGET_ENV: &str = "PONSCHED_ENUM_BUDGET";

#[derive(Parser)]
#[command(name = "ponsched", version, about = "Resource-block scheduling under PON capacity limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "dp")]
        solver: SolverId,
        #[command(flatten)]
        params: ParamArgs,
        /// Write the allocation as CSV (`ru,user,rb,rate`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum by enumeration (budget via PONSCHED_ENUM_BUDGET).
    Oracle { instance: PathBuf },
    /// Run a simulation episode and write slots.csv / users.csv.
    Simulate {
        config: PathBuf,
        /// Evaluated solvers, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "max-yield")]
        solver: Vec<SolverId>,
        #[arg(long, default_value = "max-yield")]
        driver: SolverId,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check an allocation CSV (as written by `solve --out`) against an instance.
    Check { instance: PathBuf, allocation: PathBuf },
    /// Random-instance invariant and ratio checks.
    Corpus {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_users: usize,
        #[arg(long, default_value_t = 4)]
        max_rbs: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// DP quantum (default: usable capacity / 10000).
    #[arg(long)]
    quantum: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Seed for randomized solvers; for `simulate` it also replaces the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Capacity shrink factor for randomized rounding.
    #[arg(long, default_value_t = 0.9)]
    shrink: f64,
}

impl ParamArgs {
    fn solver_params(&self) -> Result<SolverParams, Error> {
        Ok(SolverParams {
            quantum: self.quantum,
            epsilon: self.epsilon,
            seed: self.seed.unwrap_or(0),
            shrink: self.shrink,
            enum_budget: enum_budget()?,
            ..SolverParams::default()
        })
    }
}

fn enum_budget() -> Result<u128, Error> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("{BUDGET_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_ENUM_BUDGET),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => 3,
        Error::Infeasible(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { instance, solver, params, out } => cmd_solve(&instance, solver, &params, out.as_deref()),
        Command::Oracle { instance } => cmd_oracle(&instance),
        Command::Check { instance, allocation } => cmd_check(&instance, &allocation),
        Command::Simulate { config, solver, driver, params, out } => cmd_simulate(&config, &solver, driver, &params, &out),
        Command::Corpus { count, seed, max_users, max_rbs, epsilon } => {
            let failures = corpus::run(count, seed, max_users, max_rbs, epsilon);
            return if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn print_result(inst: &Instance, r: &SolveResult) {
    println!("objective: {:?}", r.objective);
    println!("assignment (ru, rb -> user, rate):");
    for (i, j, k) in r.allocation.assignment.assigned() {
        println!("  {i} {k} -> {j} {:?}", r.allocation.rate(inst, i, j, k));
    }
    for (key, v) in &r.meta {
        println!("meta {key}: {v}");
    }
}

fn cmd_solve(path: &std::path::Path, solver: SolverId, args: &ParamArgs, out: Option<&std::path::Path>) -> Result<(), Error> {
    let inst = Instance::load(path)?;
    let r = solve(solver, &inst, &args.solver_params()?)?;
    println!("solver: {solver}");
    print_result(&inst, &r);
    if let Some(out) = out {
        let mut text = String::from("ru,user,rb,rate\n");
        for (i, j, k) in r.allocation.assignment.assigned() {
            text.push_str(&format!("{i},{j},{k},{}\n", r.allocation.rate(&inst, i, j, k)));
        }
        std::fs::write(out, text)?;
    }
    Ok(())
}

fn cmd_check(path: &std::path::Path, alloc_path: &std::path::Path) -> Result<(), Error> {
    let inst = Instance::load(path)?;
    let text = std::fs::read_to_string(alloc_path).map_err(|e| Error::Io(format!("{}: {e}", alloc_path.display())))?;
    let mut alloc = Allocation::zero(&inst);
    for (n, line) in text.lines().enumerate().skip(1) {
        let bad = || Error::Parse(format!("{}:{}: expected ru,user,rb,rate", alloc_path.display(), n + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(bad());
        }
        let (i, j, k): (usize, usize, usize) =
            (f[0].parse().map_err(|_| bad())?, f[1].parse().map_err(|_| bad())?, f[2].parse().map_err(|_| bad())?);
        let rate: f64 = f[3].parse().map_err(|_| bad())?;
        if i >= inst.ru_count() || j >= inst.users(i) || k >= inst.rb_count() {
            return Err(Error::Structure(format!("line {}: ({i}, {j}, {k}) outside the instance", n + 1)));
        }
        if alloc.assignment.get(i, k).is_some() {
            return Err(Error::Infeasible(format!("slot ({i}, {k}) assigned twice")));
        }
        alloc.assignment.set(i, k, Some(j));
        alloc.rates[inst.triple_index(i, j, k)] = rate;
    }
    let report = check_feasible(&inst, &alloc)?;
    if !report.is_feasible() {
        for v in &report.violations {
            println!("violation: {v:?}");
        }
        return Err(Error::Infeasible(format!("{} constraint(s) violated", report.violations.len())));
    }
    println!("feasible, objective: {:?}", objective_of(&inst, &alloc)?);
    Ok(())
}

fn cmd_oracle(path: &std::path::Path) -> Result<(), Error> {
    let inst = Instance::load(path)?;
    let r = brute_force_oracle_with(&inst, enum_budget()?, Exec::default())?;
    print_result(&inst, &r);
    Ok(())
}

fn cmd_simulate(
    path: &std::path::Path,
    solvers: &[SolverId],
    driver: SolverId,
    args: &ParamArgs,
    out: &std::path::Path,
) -> Result<(), Error> {
    let mut cfg = SimConfig::load(path)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let params = SolverParams { seed: cfg.seed, ..args.solver_params()? };
    let result = run_episode(&cfg, solvers, driver, &params)?;
    result.write_csv(out)?;
    for &id in solvers {
        let obj = result.objectives(id);
        let mean = obj.iter().sum::<f64>() / obj.len().max(1) as f64;
        println!("{id}: mean objective {mean:.6} over {} slots", obj.len());
    }
    let mut rates: Vec<f64> = result.users.iter().map(|u| u.avg_rate_bps).collect();
    rates.sort_by(f64::total_cmp);
    let pct = |p: f64| rates[((p / 100.0) * (rates.len() - 1) as f64).round() as usize];
    println!(
        "user rate percentiles (bps, driver {driver}): p5 {:.0} p25 {:.0} p50 {:.0} p75 {:.0} p95 {:.0}",
        pct(5.0),
        pct(25.0),
        pct(50.0),
        pct(75.0),
        pct(95.0)
    );
    println!("wrote {} and {}", out.join("slots.csv").display(), out.join("users.csv").display());
    Ok(())
}
