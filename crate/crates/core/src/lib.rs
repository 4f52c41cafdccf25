//! Latency- and radio-aware placement of robotic virtual functions across
//! robots, Edge servers and the Cloud.

pub mod feasibility;
pub mod model;
pub mod routing;
pub mod dlmd;
pub mod oracle;
pub mod baselines;
pub mod solver;
pub mod scenario;
pub mod topology;
pub mod sim;
