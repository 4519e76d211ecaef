//! Scheduling of wireless resource blocks under passive-optical mid-haul
//! capacity limits.
//!
//! Every solver consumes an [`Instance`]: per-RB air-interface rates, per-user
//! weights, per-RU fiber capacities and the total PON capacity. Solvers return
//! a [`SolveResult`] whose allocation always passes [`check_feasible`].
//!
//! Layout:
//! - [`model`]: domain types, feasibility, objective, quantization, brute-force oracle
//! - [`alloc`]: optimal rates for a fixed assignment, PF certificate
//! - [`singlecell`]: LP relaxation, rounding, dynamic programs, FPTAS, dual bound
//! - [`general`]: matroid greedy, multiplicative-weights LP, randomized rounding
//! - [`heuristics`]: max-yield / max-value baselines
//! - [`sim`]: network geometry, fading, proportional-fair driver loop
//! - [`solver`]: string-addressable solver registry used by the simulator and CLI

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alloc;
pub mod error;
pub mod general;
pub mod heuristics;
pub mod lp;
pub mod model;
pub mod par;
pub mod sim;
pub mod singlecell;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    brute_force_oracle, check_feasible, objective_of, Allocation, Assignment, Instance,
    QuantizedInstance, SingleCellInstance, SolveResult,
};
pub use par::Exec;
