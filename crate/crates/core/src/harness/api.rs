//! Request and response bodies of the HTTP service.

use serde::{Deserialize, Serialize};

use super::metrics::RunSummary;
use super::run::{CommandTape, EfficiencyRow, MatrixCell, MatrixSpec, Overrides};
use super::scenario::{builtin_scenario, Scenario, ScenarioError};
use crate::sim::{Strategy, TickRecord};

/// Where a request's scenario comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioRef {
    /// Name of a shipped scenario.
    Builtin(String),
    /// Scenario file contents.
    Toml(String),
    /// Path readable by the service.
    Path(String),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        match self {
            ScenarioRef::Builtin(name) => builtin_scenario(name).ok_or_else(|| ScenarioError::Invalid {
                line: None,
                message: format!("no builtin scenario named `{name}`"),
            }),
            ScenarioRef::Toml(text) => Scenario::from_toml(text),
            ScenarioRef::Path(p) => Scenario::load(std::path::Path::new(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRequest {
    pub scenario: ScenarioRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub name: String,
    pub robots: usize,
    pub targets: usize,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub overrides: Overrides,
    /// Directory on the service host to write metrics into.
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResponse {
    pub summary: RunSummary,
    #[serde(default)]
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRequest {
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub spec: MatrixSpec,
    /// Strategy the efficiency table is relative to.
    #[serde(default)]
    pub baseline: Option<Strategy>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResponse {
    pub cells: Vec<MatrixCell>,
    pub efficiency: Vec<EfficiencyRow>,
    #[serde(default)]
    pub files: Vec<String>,
}

/// Drives a live session with a recorded tape and returns its ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayRequest {
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub overrides: Overrides,
    pub tape: CommandTape,
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayResponse {
    pub records: Vec<TickRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default)]
    pub line: Option<usize>,
}
