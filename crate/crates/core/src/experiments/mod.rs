//! Scenario files, observables, the scenario runner and the built-in
//! figure reproductions.

mod builtins;
mod config;
mod observables;
mod output;
mod runner;

pub use builtins::{
    builtin_names, builtin_scenarios, rabi_metrics, rabi_period_estimate, run_builtin, BuiltinOutcome, RabiMetrics,
    INTERACTION_WINDOW, RABI_HIGH,
};
pub use config::{EnergyValue, EventSpec, PacketSpec, PhotonSpec, PotentialSpec, RunSpec, ScenarioSpec, SolverKind};
pub use observables::{
    level_populations, presence_density, presence_density_2d, LevelPopulations, PopulationSeries, PresenceDensity,
};
pub use output::{fmt_f, RunDir, Summary};
pub use runner::{run_scenario, EventRecord, RunOutcome};
