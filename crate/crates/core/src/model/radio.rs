use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModelError, NodeId};

/// Received signal strength per (robot, PoA) pair plus the noise floor, all in
/// linear power units. Pairs that are absent have σ = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadioRepr", into = "RadioRepr")]
pub struct RadioState {
    noise: f64,
    sigma: BTreeMap<(NodeId, NodeId), f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEntry {
    pub robot: NodeId,
    pub poa: NodeId,
    pub sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct RadioRepr {
    noise: f64,
    #[serde(default)]
    sigma: Vec<SigmaEntry>,
}

impl TryFrom<RadioRepr> for RadioState {
    type Error = ModelError;

    fn try_from(r: RadioRepr) -> Result<Self, Self::Error> {
        let mut state = RadioState::new(r.noise)?;
        for e in r.sigma {
            state.set_sigma(e.robot, e.poa, e.sigma)?;
        }
        Ok(state)
    }
}

impl From<RadioState> for RadioRepr {
    fn from(s: RadioState) -> Self {
        RadioRepr {
            noise: s.noise,
            sigma: s.entries().collect(),
        }
    }
}

impl RadioState {
    pub fn new(noise: f64) -> Result<Self, ModelError> {
        if !(noise > 0.0) || !noise.is_finite() {
            return Err(ModelError::InvalidRadio("noise must be positive".into()));
        }
        Ok(Self {
            noise,
            sigma: BTreeMap::new(),
        })
    }

    pub fn with_sigma(mut self, robot: NodeId, poa: NodeId, sigma: f64) -> Result<Self, ModelError> {
        self.set_sigma(robot, poa, sigma)?;
        Ok(self)
    }

    pub fn set_sigma(&mut self, robot: NodeId, poa: NodeId, sigma: f64) -> Result<(), ModelError> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(ModelError::InvalidRadio(format!(
                "signal {robot}->{poa} must be non-negative"
            )));
        }
        self.sigma.insert((robot, poa), sigma);
        Ok(())
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn sigma(&self, robot: NodeId, poa: NodeId) -> f64 {
        self.sigma.get(&(robot, poa)).copied().unwrap_or(0.0)
    }

    pub fn snr(&self, robot: NodeId, poa: NodeId) -> f64 {
        self.sigma(robot, poa) / self.noise
    }

    pub fn entries(&self) -> impl Iterator<Item = SigmaEntry> + '_ {
        self.sigma.iter().map(|(&(robot, poa), &sigma)| SigmaEntry { robot, poa, sigma })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_pairs_are_silent() {
        let r = RadioState::new(2.0).unwrap().with_sigma(NodeId(0), NodeId(1), 6.0).unwrap();
        assert_eq!(r.snr(NodeId(0), NodeId(1)), 3.0);
        assert_eq!(r.sigma(NodeId(0), NodeId(2)), 0.0);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RadioState::new(0.0).is_err());
        assert!(RadioState::new(1.0).unwrap().with_sigma(NodeId(0), NodeId(1), -1.0).is_err());
        assert!(serde_json::from_str::<RadioState>(r#"{"noise": -1}"#).is_err());
    }
}
