//! Solver library and benchmark harness for the Dynamic Travelling Thief Problem.
//!
//! A thief walks a tour over a set of cities, collecting items into a knapsack whose
//! weight slows travel, and pays rent for every unit of travel time. The dynamic variant
//! flips the availability of items or cities between epochs; this crate evaluates
//! solutions, repairs them after each disruption, re-optimizes with seven recover or
//! from-scratch pipelines, and aggregates the resulting trajectories.
//!
//! Modules, bottom-up:
//! - [`model`]: instance data, tours, packing plans and objective evaluation.
//! - [`io`]: instance files, the synthetic generator, scenario configs and CSV output.
//! - [`dynamics`]: availability masks, the deterministic disruption stream and repairs.
//! - [`solvers`]: evaluation budgets, the heuristics and the pipeline dispatcher.
//! - [`harness`]: epoch-driven scenario execution and batch archives.
//! - [`analysis`]: averaging, normalization, END/AUC, Mann-Whitney U and heatmaps.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod io;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};
