//! Serializable payloads. Reports carry the seed, tolerances and schedule
//! hash; they never carry timestamps, so identical inputs give byte-identical
//! output.

use std::fmt::Write as _;

use onebranch::branching::PRUNE_WEIGHT;
use onebranch::verify::PROPERTY_TOL;
use onebranch::{CorrelationResult, ReplayReport, TOL_NORM, TOL_UNITARY};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub norm: f64,
    pub unitary: f64,
    pub property: f64,
    pub prune_weight: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: TOL_NORM,
            unitary: TOL_UNITARY,
            property: PROPERTY_TOL,
            prune_weight: PRUNE_WEIGHT,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            passed: value < tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchRow {
    pub history: String,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleRow {
    pub history: String,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

/// Branch table, ensemble dump, replays and invariant checks for one model.
#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub schedule_hash: String,
    pub n_qubits: usize,
    pub n_events: usize,
    pub branches: Vec<BranchRow>,
    pub ensemble: Vec<EnsembleRow>,
    pub replay: Vec<ReplayReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ModelReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (value {:.3e})", c.name, c.value))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={} schedule_hash={}\nhistory,weight\n", self.seed, self.schedule_hash);
        for b in &self.branches {
            let _ = writeln!(out, "\"{}\",{}", b.history, b.weight);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BellRow {
    #[serde(flatten)]
    pub result: CorrelationResult,
    pub schedule_hash: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BellReport {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub sigma_bound: f64,
    pub rows: Vec<BellRow>,
    pub passed: bool,
}

impl BellReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={} sigma_bound={}\ntheta,n,estimate,stderr,exact,seed\n", self.seed, self.sigma_bound);
        for row in &self.rows {
            let r = &row.result;
            let _ = writeln!(out, "{},{},{},{},{},{}", r.theta, r.n, r.estimate, r.stderr, r.exact, r.seed);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub schedule_hash: String,
    pub drawn_history: String,
    pub weight: f64,
    pub replay: ReplayReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<(String, u64)>>,
    pub passed: bool,
}
