//! The JSON run configuration.

use serde::Deserialize;
use softcap_core::ModelSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default)]
    pub verifiers: Vec<VerifierSpec>,
    #[serde(default)]
    pub oracle: Option<OracleSection>,
    #[serde(default)]
    pub scan: Option<ScanSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub reps: u64,
    pub step_budget: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub z0: Option<u64>,
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(default)]
    pub record_full_traces: bool,
}

fn default_k_max() -> u64 {
    5
}

fn default_visit_max() -> u64 {
    50
}

fn default_c_max() -> u64 {
    1
}

fn default_tail_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifierSpec {
    Assumptions {
        #[serde(default)]
        z_max: Option<u64>,
        #[serde(default = "default_visit_max")]
        k_max: u64,
    },
    Extinction,
    /// Monte Carlo against the first-step oracle; needs an `oracle` section.
    OracleAgreement,
    Doob {
        x_list: Vec<u64>,
    },
    HitZero,
    Geometry {
        #[serde(default = "default_k_max")]
        k_max: u64,
    },
    ReturnTime {
        delta: f64,
        #[serde(default = "default_c_max")]
        c_max: u64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub state_cap: u64,
    /// When set, refuse unless P(reach cap) from `start` (default: the
    /// ensemble's `z0`) is at most this.
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    #[serde(default)]
    pub start: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(rename = "K_list")]
    pub k_list: Vec<u64>,
    #[serde(default)]
    pub oracle_margin: Option<u64>,
    #[serde(default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
}

/// Parse a config document, naming the line and column of any error.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        match msg.rfind(" at line ") {
            // serde_json already appends "at line L column C"
            Some(_) => msg,
            None => format!("{msg} (line {}, column {})", e.line(), e.column()),
        }
    })
}
