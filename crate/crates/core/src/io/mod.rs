//! Instance files, the synthetic generator, scenario configs and result tables.

pub mod generate;
pub mod instance;
pub mod scenario;
pub mod tables;

pub use generate::{generate_instance, GeneratorParams, KnapsackKind};
pub use instance::{instance_to_string, parse_instance, parse_instance_str, write_instance};
pub use scenario::{parse_scenario, InstanceSource, Period, ScenarioConfig};
pub use tables::{
    read_disruption_trace, read_epoch_table, read_trajectories, write_disruption_trace,
    write_epoch_table, write_trajectories, EpochRow, TrajectoryRow,
};
