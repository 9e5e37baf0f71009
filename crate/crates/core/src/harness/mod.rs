//! Scenario files, batch runs, metrics output and live sessions.

pub mod api;
mod metrics;
mod run;
mod scenario;
mod session;
pub mod wire;

use thiserror::Error;

use crate::sim::SimError;

pub use metrics::{
    efficiency_csv, emit_matrix, emit_metrics, histogram_csv, matrix_csv, ticks_csv, EmittedFiles, RunSummary,
    METRICS_SCHEMA,
};
pub use run::{
    build_simulation, efficiency_report, run_experiment, run_matrix, run_with_tape, CommandTape, EfficiencyRow,
    MatrixCell, MatrixSpec, MetricsLog, Overrides, TapeEntry,
};
pub use scenario::{
    builtin_scenario, ClutterDef, ObstacleDef, Scenario, ScenarioError, TargetArea, Units, WorldDef,
    BUILTIN_SCENARIOS, SCENARIO_SCHEMA,
};
pub use session::Session;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Io(String),
}
