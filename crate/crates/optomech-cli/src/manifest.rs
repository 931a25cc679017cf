use serde::{Deserialize, Serialize};

use crate::config::{format_cutoffs, ScenarioKind};
use crate::converge::ConvergenceTable;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Provenance record written next to every set of outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: String,
    pub config_digest: String,
    pub scenario: ScenarioKind,
    pub code_version: String,
    pub wall_time_seconds: f64,
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Cutoff-ladder results, empty when no convergence check was requested.
    pub convergence: Vec<ConvergenceEntry>,
    pub converged: bool,
    /// Written files, relative to the output directory.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub quantity: String,
    pub values: Vec<f64>,
    pub cutoffs: Vec<String>,
    pub final_relative_change: f64,
    pub tolerance: f64,
    pub converged: bool,
}

impl From<&ConvergenceTable> for ConvergenceEntry {
    fn from(t: &ConvergenceTable) -> Self {
        Self {
            quantity: t.quantity.clone(),
            values: t.rows.iter().map(|r| r.value).collect(),
            cutoffs: t.rows.iter().map(|r| format_cutoffs(&r.cutoffs)).collect(),
            final_relative_change: t.final_relative_change,
            tolerance: t.tolerance,
            converged: t.converged,
        }
    }
}
