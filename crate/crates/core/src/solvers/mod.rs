//! Heuristics for re-optimizing after a disruption, all driven by an evaluation [`Budget`].
//!
//! Packing: [`bitflip`], [`pack_iterative`], [`rea`]. Tour: [`insertion`],
//! [`tour_construct`]. [`run_pipeline`] composes them into the seven pipelines. Solvers
//! compare objective values with strict `>`; ties are never improvements, except in the
//! EA's slot replacement which accepts equal values.

pub mod bitflip;
pub mod budget;
pub mod insertion;
pub mod pack_iterative;
pub mod pipeline;
pub mod rea;
pub mod tour;

pub use bitflip::bitflip;
pub use budget::Budget;
pub use insertion::insertion;
pub use pack_iterative::{
    greedy_packing, pack_iterative, pack_iterative_search, PackIterativeOutcome,
};
pub use pipeline::{run_pipeline, Pipeline};
pub use rea::{rea, ReaPopulation};
pub use tour::{
    find_improving_two_opt, nearest_neighbour, tour_construct, tour_construct_with, two_opt,
};
