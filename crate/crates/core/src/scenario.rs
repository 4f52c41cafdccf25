//! Scenario files: the substrate, the services, the radio environment and an
//! optional mobility trace, as one JSON document.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    build_graph, validate_services, HardwareGraph, Link, ModelError, Node, NodeId, NodeKind, RadioState,
    ServiceSpec, SigmaEntry,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub services: Vec<ServiceSpec>,
    pub radio: RadioSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<MobilityTrace>,
    #[serde(default)]
    pub options: ScenarioOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    /// Weight of the inverse-bandwidth term in the greedy path metric.
    #[serde(default = "one")]
    pub alpha: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioSection {
    pub noise: f64,
    /// Static signal strengths, used when there is no signal model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma: Vec<SigmaEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SignalModel {
    /// Scripted σ per PoA; a row holds until a later row for the same PoA.
    Table { rows: Vec<TableRow> },
    /// σ = P·(d/d₀)^(−exponent) with P the PoA's `tx_power` or
    /// `reference_power`, and optional log-normal shadowing.
    PathLoss {
        reference_power: f64,
        exponent: f64,
        #[serde(default = "one")]
        reference_distance_m: f64,
        #[serde(default)]
        shadowing_db: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub t: f64,
    pub poa: NodeId,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityTrace {
    pub robot: NodeId,
    pub step_s: f64,
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub position: [f64; 2],
}

impl MobilityTrace {
    pub fn duration(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.step_s > 0.0) {
            return Err(ScenarioError::Invalid("trace step must be positive".into()));
        }
        if self.points.is_empty() {
            return Err(ScenarioError::Invalid("trace has no points".into()));
        }
        for w in self.points.windows(2) {
            let dt = w[1].t - w[0].t;
            if (dt - self.step_s).abs() > 1e-6 * self.step_s.max(1.0) {
                return Err(ScenarioError::Invalid(format!(
                    "trace times must advance by {} s (at t = {})",
                    self.step_s, w[0].t
                )));
            }
        }
        Ok(())
    }
}

impl SignalModel {
    /// Signal strengths seen by `robot` at `position` and time `t`.
    /// `seed` and `step` key the shadowing draws.
    pub fn radio_at(
        &self,
        graph: &HardwareGraph,
        noise: f64,
        robot: NodeId,
        position: [f64; 2],
        t: f64,
        seed: u64,
        step: usize,
    ) -> Result<RadioState, ModelError> {
        let mut radio = RadioState::new(noise)?;
        for poa in graph.poas_of(robot) {
            let sigma = match self {
                SignalModel::Table { rows } => rows
                    .iter()
                    .filter(|r| r.poa == poa && r.t <= t + 1e-9)
                    .max_by(|a, b| a.t.total_cmp(&b.t))
                    .map_or(0.0, |r| r.sigma),
                SignalModel::PathLoss {
                    reference_power,
                    exponent,
                    reference_distance_m,
                    shadowing_db,
                } => {
                    let node = graph.node(poa).expect("PoA of the graph");
                    let Some([x, y]) = node.position else {
                        radio.set_sigma(robot, poa, 0.0)?;
                        continue;
                    };
                    let d = ((x - position[0]).powi(2) + (y - position[1]).powi(2))
                        .sqrt()
                        .max(*reference_distance_m);
                    let power = node.tx_power.unwrap_or(*reference_power);
                    let mut sigma = power * (d / reference_distance_m).powf(-exponent);
                    if *shadowing_db > 0.0 {
                        let key = seed ^ (step as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (u64::from(poa.0) << 48);
                        let mut rng = ChaCha8Rng::seed_from_u64(key);
                        let db: f64 = Normal::new(0.0, *shadowing_db).unwrap().sample(&mut rng);
                        sigma *= 10f64.powf(db / 10.0);
                    }
                    sigma
                }
            };
            radio.set_sigma(robot, poa, sigma)?;
        }
        Ok(radio)
    }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn graph(&self) -> Result<HardwareGraph, ModelError> {
        build_graph(self.nodes.clone(), self.links.clone())
    }

    /// Check the graph, the services, the radio section and the trace.
    pub fn validate(&self) -> Result<HardwareGraph, ScenarioError> {
        let graph = self.graph()?;
        validate_services(&graph, &self.services)?;
        RadioState::new(self.radio.noise)?;
        if let Some(SignalModel::PathLoss {
            reference_power,
            exponent,
            reference_distance_m,
            shadowing_db,
        }) = &self.radio.signal
        {
            if !(*reference_power >= 0.0 && *exponent > 0.0 && *reference_distance_m > 0.0 && *shadowing_db >= 0.0)
            {
                return Err(ScenarioError::Invalid("path-loss parameters out of range".into()));
            }
        }
        if let Some(trace) = &self.trace {
            trace.validate()?;
            if graph.node(trace.robot).map(|n| n.kind) != Some(NodeKind::Robot) {
                return Err(ScenarioError::Invalid(format!("trace robot {} is not a robot", trace.robot)));
            }
            if self.radio.signal.is_none() {
                return Err(ScenarioError::Invalid("a trace needs a signal model".into()));
            }
        }
        if !(self.options.alpha >= 0.0) {
            return Err(ScenarioError::Invalid("alpha must be non-negative".into()));
        }
        Ok(graph)
    }

    /// Radio state for a one-shot solve: the static σ list, or the signal
    /// model evaluated at the first trace point.
    pub fn static_radio(&self, graph: &HardwareGraph) -> Result<RadioState, ScenarioError> {
        if let (Some(trace), Some(signal)) = (&self.trace, &self.radio.signal) {
            let p = trace.points[0];
            return Ok(signal.radio_at(graph, self.radio.noise, trace.robot, p.position, p.t, 0, 0)?);
        }
        let mut radio = RadioState::new(self.radio.noise)?;
        for e in &self.radio.sigma {
            radio.set_sigma(e.robot, e.poa, e.sigma)?;
        }
        Ok(radio)
    }
}
