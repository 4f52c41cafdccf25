use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{latency_agnostic_solve_all, radio_agnostic_solve_all, BaselineError};
use crate::dlmd::{place_services, DlmdError, DlmdOptions};
use crate::model::{Embedding, HardwareGraph, RadioState, ServiceSpec};
use crate::oracle::{optimal_solve, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dlmd,
    LatencyAgnostic,
    RadioAgnostic,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Dlmd,
        Algorithm::LatencyAgnostic,
        Algorithm::RadioAgnostic,
        Algorithm::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dlmd => "dlmd",
            Algorithm::LatencyAgnostic => "latency-agnostic",
            Algorithm::RadioAgnostic => "radio-agnostic",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected dlmd, latency-agnostic, radio-agnostic or oracle)"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Dlmd(#[from] DlmdError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl SolveError {
    pub fn is_no_coverage(&self) -> bool {
        matches!(self, SolveError::Dlmd(DlmdError::NoCoverage(_)))
    }
}

/// Embed all services with the chosen algorithm.
pub fn solve(
    algorithm: Algorithm,
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    radio: &RadioState,
    alpha: f64,
) -> Result<Embedding, SolveError> {
    Ok(match algorithm {
        Algorithm::Dlmd => {
            let opts = DlmdOptions {
                alpha,
                ..DlmdOptions::default()
            };
            place_services(graph, services, radio, &opts)?
        }
        Algorithm::LatencyAgnostic => latency_agnostic_solve_all(graph, services, radio)?,
        Algorithm::RadioAgnostic => radio_agnostic_solve_all(graph, services, radio, alpha)?,
        Algorithm::Oracle => optimal_solve(graph, services, radio)?.embedding,
    })
}
