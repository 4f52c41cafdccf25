//! Discrete-time episodes: the robot follows its trace, the radio is
//! re-evaluated and the chosen algorithm re-solves at every step.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dlmd::{prune_poas, DlmdError};
use crate::feasibility::{check_embedding, delay_report, objective, wireless_capacity, ViolationKind};
use crate::model::{Embedding, HardwareGraph, ModelError, NodeId, RadioState, VfId};
use crate::scenario::{MobilityTrace, Scenario, ScenarioError};
use crate::solver::{solve, Algorithm, SolveError};
use crate::topology::{stress_scenario, TopologyError, TopologyParams};

pub const SCHEMA_VERSION: u32 = 1;

/// z-score of a two-sided 90% normal interval.
const Z90: f64 = 1.644_853_626_951_472_2;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("scenario has no mobility trace")]
    MissingTrace,
    #[error("stress level {0} outside [0, 1]")]
    StressLevel(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One solver invocation of an episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t_s: f64,
    pub algorithm: Algorithm,
    pub attachment: Option<NodeId>,
    pub placements: BTreeMap<VfId, NodeId>,
    /// Largest end-to-end delay over the scenario's services.
    pub delay_ms: Option<f64>,
    pub d_net_ms: Option<f64>,
    pub d_pro_ms: Option<f64>,
    pub cost: Option<f64>,
    pub connected: bool,
    pub deadline_met: bool,
    pub migration: bool,
    pub handover: bool,
    /// SNR of the attached PoA.
    pub snr_db: Option<f64>,
    /// Effective capacity of the attached wireless link.
    pub bandwidth_mbps: Option<f64>,
    /// Edge compute used, as a fraction of the unstressed Edge total.
    pub edge_usage: f64,
    pub violations: Vec<ViolationKind>,
    /// Migration was needed: no previous embedding, or it no longer passes
    /// the checker.
    pub migration_needed: bool,
    pub runtime_ms: f64,
}

impl StepRecord {
    /// Whether the solver produced an embedding that passes the checker.
    pub fn feasible(&self) -> bool {
        self.cost.is_some() && self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub schema_version: u32,
    pub scenario: Option<String>,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub steps: usize,
    pub migrations: usize,
    pub handovers: usize,
    pub deadline_rate: f64,
    pub connectivity_rate: f64,
    pub feasible_rate: f64,
    #[serde(with = "crate::feasibility::finite_or_null")]
    pub mean_delay_ms: f64,
    #[serde(with = "crate::feasibility::finite_or_null")]
    pub max_delay_ms: f64,
    pub mean_cost: f64,
    pub edge_usage: f64,
    pub migration_success_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub records: Vec<StepRecord>,
    pub summary: EpisodeSummary,
}

/// Run the scenario's trace with `algorithm`. `seed` drives the shadowing.
pub fn run_episode(scenario: &Scenario, algorithm: Algorithm, seed: u64) -> Result<Episode, SimError> {
    let graph = scenario.validate()?;
    run_episode_on(scenario, &graph, graph.edge_compute(), algorithm, seed)
}

/// As [`run_episode`] on a copy of the graph with `level` of every
/// capacity consumed by background load.
pub fn run_stressed_episode(
    scenario: &Scenario,
    level: f64,
    algorithm: Algorithm,
    seed: u64,
) -> Result<Episode, SimError> {
    if !(0.0..=1.0).contains(&level) {
        return Err(SimError::StressLevel(level));
    }
    let graph = scenario.validate()?;
    let edge_total = graph.edge_compute();
    run_episode_on(scenario, &graph.stressed(level), edge_total, algorithm, seed)
}

fn run_episode_on(
    scenario: &Scenario,
    graph: &HardwareGraph,
    edge_total: f64,
    algorithm: Algorithm,
    seed: u64,
) -> Result<Episode, SimError> {
    let trace = scenario.trace.as_ref().ok_or(SimError::MissingTrace)?;
    let signal = scenario.radio.signal.as_ref().ok_or(SimError::MissingTrace)?;
    let mut records = Vec::with_capacity(trace.points.len());
    let mut prev: Option<Embedding> = None;
    let mut prev_attachment: Option<NodeId> = None;
    for (step, point) in trace.points.iter().enumerate() {
        let radio = signal.radio_at(graph, scenario.radio.noise, trace.robot, point.position, point.t, seed, step)?;
        let rec = step_record(
            scenario,
            graph,
            edge_total,
            trace,
            &radio,
            algorithm,
            point.t,
            prev.as_ref(),
            prev_attachment,
        );
        let (rec, emb) = rec;
        if let Some(e) = emb {
            prev_attachment = e.attachment_of(trace.robot).or(prev_attachment);
            prev = Some(e);
        }
        records.push(rec);
    }
    let summary = summarize(&records, scenario.name.clone(), algorithm, seed);
    Ok(Episode { records, summary })
}

#[allow(clippy::too_many_arguments)]
fn step_record(
    scenario: &Scenario,
    graph: &HardwareGraph,
    edge_total: f64,
    trace: &MobilityTrace,
    radio: &RadioState,
    algorithm: Algorithm,
    t: f64,
    prev: Option<&Embedding>,
    prev_attachment: Option<NodeId>,
) -> (StepRecord, Option<Embedding>) {
    let services = &scenario.services;
    let robot = trace.robot;
    let migration_needed = prev.is_none_or(|e| !check_embedding(graph, services, e, radio).is_empty());
    let start = Instant::now();
    let result = solve(algorithm, graph, services, radio, scenario.options.alpha);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut rec = StepRecord {
        t_s: t,
        algorithm,
        attachment: None,
        placements: BTreeMap::new(),
        delay_ms: None,
        d_net_ms: None,
        d_pro_ms: None,
        cost: None,
        connected: false,
        deadline_met: false,
        migration: false,
        handover: false,
        snr_db: None,
        bandwidth_mbps: None,
        edge_usage: 0.0,
        violations: Vec::new(),
        migration_needed,
        runtime_ms,
    };
    let e = match result {
        Ok(e) => e,
        Err(err) => {
            log::debug!("t = {t}: {err}");
            rec.connected = connected_after_error(graph, scenario, robot, radio, &err);
            return (rec, None);
        }
    };
    let mut kinds: Vec<ViolationKind> = check_embedding(graph, services, &e, radio).iter().map(|v| v.kind).collect();
    kinds.dedup();
    rec.connected = !kinds.iter().any(|k| k.is_radio());
    rec.attachment = e.attachment_of(robot);
    rec.placements = e.placements.clone();
    rec.cost = Some(objective(graph, &e));
    let worst = services
        .iter()
        .map(|s| delay_report(graph, s, &e))
        .max_by(|a, b| a.total_ms.total_cmp(&b.total_ms));
    if let Some(d) = &worst {
        rec.delay_ms = Some(d.total_ms);
        rec.d_net_ms = Some(d.network_ms);
        rec.d_pro_ms = Some(d.processing_ms());
    }
    rec.deadline_met = rec.connected
        && services
            .iter()
            .all(|s| delay_report(graph, s, &e).total_ms <= s.deadline * (1.0 + 1e-9));
    rec.migration = prev.is_some_and(|p| p.placements != e.placements);
    rec.handover = matches!((prev_attachment, rec.attachment), (Some(a), Some(b)) if a != b);
    if let Some(poa) = rec.attachment {
        let snr = radio.snr(robot, poa);
        rec.snr_db = Some(if snr > 0.0 { 10.0 * snr.log10() } else { f64::NEG_INFINITY });
        rec.bandwidth_mbps = graph.link_between(robot, poa).map(|l| wireless_capacity(graph, l, radio));
    }
    if edge_total > 0.0 {
        let used: f64 = services
            .iter()
            .flat_map(|s| &s.vfs)
            .filter(|vf| e.placement(vf.id).and_then(|n| graph.node(n)).is_some_and(|n| n.is_edge_server()))
            .map(|vf| vf.compute)
            .sum();
        rec.edge_usage = used / edge_total;
    }
    rec.violations = kinds;
    (rec, Some(e))
}

// Without an embedding the robot still counts as connected if some PoA
// could carry its first VL.
fn connected_after_error(
    graph: &HardwareGraph,
    scenario: &Scenario,
    robot: NodeId,
    radio: &RadioState,
    err: &SolveError,
) -> bool {
    if err.is_no_coverage() {
        return false;
    }
    let demand = scenario
        .services
        .iter()
        .filter(|s| s.robot(graph) == Some(robot))
        .map(|s| s.first_vl_demand())
        .fold(0.0, f64::max);
    !matches!(prune_poas(graph, robot, demand, radio), Err(DlmdError::NoCoverage(_)))
}

fn summarize(records: &[StepRecord], scenario: Option<String>, algorithm: Algorithm, seed: u64) -> EpisodeSummary {
    let n = records.len().max(1) as f64;
    let rate = |f: &dyn Fn(&StepRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n;
    let delays: Vec<f64> = records.iter().filter_map(|r| r.delay_ms).collect();
    let solved: Vec<&StepRecord> = records.iter().filter(|r| r.cost.is_some()).collect();
    let needed = records.iter().filter(|r| r.migration_needed).count();
    let succeeded = records.iter().filter(|r| r.migration_needed && r.feasible()).count();
    EpisodeSummary {
        schema_version: SCHEMA_VERSION,
        scenario,
        algorithm,
        seed,
        steps: records.len(),
        migrations: records.iter().filter(|r| r.migration).count(),
        handovers: records.iter().filter(|r| r.handover).count(),
        deadline_rate: rate(&|r| r.deadline_met),
        connectivity_rate: rate(&|r| r.connected),
        feasible_rate: rate(&|r| r.feasible()),
        mean_delay_ms: mean(&delays).unwrap_or(f64::NAN),
        max_delay_ms: delays.iter().copied().fold(f64::NAN, f64::max),
        mean_cost: mean(&solved.iter().filter_map(|r| r.cost).collect::<Vec<_>>()).unwrap_or(0.0),
        edge_usage: mean(&solved.iter().map(|r| r.edge_usage).collect::<Vec<_>>()).unwrap_or(0.0),
        migration_success_rate: if needed == 0 { 1.0 } else { succeeded as f64 / needed as f64 },
        runtime_ms_median: None,
    }
}

impl Episode {
    /// Summary with the runtime median filled in. Runtimes are wall-clock
    /// and therefore kept out of the default outputs.
    pub fn timed_summary(&self) -> EpisodeSummary {
        let mut times: Vec<f64> = self.records.iter().map(|r| r.runtime_ms).collect();
        EpisodeSummary {
            runtime_ms_median: median(&mut times),
            ..self.summary.clone()
        }
    }
}

pub const STEP_COLUMNS: [&str; 16] = [
    "t_s",
    "algorithm",
    "attachment",
    "placements",
    "delay_ms",
    "d_net_ms",
    "d_pro_ms",
    "cost",
    "connected",
    "deadline_met",
    "migration",
    "handover",
    "snr_db",
    "bandwidth_mbps",
    "edge_usage",
    "violations",
];

/// Per-step CSV. `timing` appends a `runtime_ms` column.
pub fn write_steps_csv(records: &[StepRecord], out: impl Write, timing: bool) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = STEP_COLUMNS.to_vec();
    if timing {
        header.push("runtime_ms");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            num(Some(r.t_s)),
            r.algorithm.to_string(),
            r.attachment.map(|n| n.to_string()).unwrap_or_default(),
            r.placements.iter().map(|(v, n)| format!("{v}@{n}")).collect::<Vec<_>>().join(";"),
            num(r.delay_ms),
            num(r.d_net_ms),
            num(r.d_pro_ms),
            num(r.cost),
            r.connected.to_string(),
            r.deadline_met.to_string(),
            r.migration.to_string(),
            r.handover.to_string(),
            num(r.snr_db),
            num(r.bandwidth_mbps),
            num(Some(r.edge_usage)),
            r.violations.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"),
        ];
        if timing {
            row.push(num(Some(r.runtime_ms)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

// Fixed precision keeps the CSVs byte-stable and diff-friendly.
fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => {
            let s = format!("{x:.6}");
            let s = s.trim_end_matches('0').trim_end_matches('.');
            if s == "-0" { "0".into() } else { s.to_string() }
        }
        Some(x) if x == f64::NEG_INFINITY => "-inf".into(),
        Some(x) if x == f64::INFINITY => "inf".into(),
        _ => String::new(),
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().fold(0.0, |a, b| a + b) / xs.len() as f64)
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 0 { (xs[m - 1] + xs[m]) / 2.0 } else { xs[m] })
}

/// Mean and half-width of the 90% normal interval; the half-width is 0 for
/// a single value. NaNs are skipped.
pub fn mean_ci90(xs: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    let Some(m) = mean(&v) else {
        return (f64::NAN, f64::NAN);
    };
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, Z90 * var.sqrt() / (v.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressConfig {
    pub params: TopologyParams,
    pub levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Trace steps between consecutive PoAs of the tour.
    pub steps_per_segment: usize,
}

/// Aggregates of one (graph size, stress level) cell over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressRow {
    pub n: usize,
    pub p: f64,
    pub stress: f64,
    pub trials: usize,
    pub delay_ms_mean: f64,
    pub delay_ms_ci: f64,
    pub deadline_rate_mean: f64,
    pub deadline_rate_ci: f64,
    pub feasible_rate_mean: f64,
    pub feasible_rate_ci: f64,
    pub edge_usage_mean: f64,
    pub edge_usage_ci: f64,
    pub migration_success_mean: f64,
    pub migration_success_ci: f64,
    pub runtime_ms_median: f64,
}

/// DLMD over freshly generated graphs: every trial draws one graph and tours
/// it once per stress level.
pub fn stress_sweep(cfg: &StressConfig) -> Result<Vec<StressRow>, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::NoTrials);
    }
    if let Some(&bad) = cfg.levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(SimError::StressLevel(bad));
    }
    let per_trial: Vec<Vec<Episode>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = cfg.seed ^ (trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let scenario = stress_scenario(&cfg.params, seed, cfg.steps_per_segment)?;
            cfg.levels
                .iter()
                .map(|&level| run_stressed_episode(&scenario, level, Algorithm::Dlmd, seed))
                .collect()
        })
        .collect::<Result<_, SimError>>()?;

    let rows = cfg
        .levels
        .iter()
        .enumerate()
        .map(|(i, &stress)| {
            let eps: Vec<&Episode> = per_trial.iter().map(|t| &t[i]).collect();
            let col = |f: &dyn Fn(&EpisodeSummary) -> f64| -> Vec<f64> { eps.iter().map(|e| f(&e.summary)).collect() };
            let (delay_ms_mean, delay_ms_ci) = mean_ci90(&col(&|s| s.mean_delay_ms));
            let (deadline_rate_mean, deadline_rate_ci) = mean_ci90(&col(&|s| s.deadline_rate));
            let (feasible_rate_mean, feasible_rate_ci) = mean_ci90(&col(&|s| s.feasible_rate));
            let (edge_usage_mean, edge_usage_ci) = mean_ci90(&col(&|s| s.edge_usage));
            let (migration_success_mean, migration_success_ci) = mean_ci90(&col(&|s| s.migration_success_rate));
            let mut times: Vec<f64> = eps.iter().flat_map(|e| e.records.iter().map(|r| r.runtime_ms)).collect();
            StressRow {
                n: cfg.params.n,
                p: cfg.params.p,
                stress,
                trials: cfg.trials,
                delay_ms_mean,
                delay_ms_ci,
                deadline_rate_mean,
                deadline_rate_ci,
                feasible_rate_mean,
                feasible_rate_ci,
                edge_usage_mean,
                edge_usage_ci,
                migration_success_mean,
                migration_success_ci,
                runtime_ms_median: median(&mut times).unwrap_or(f64::NAN),
            }
        })
        .collect();
    Ok(rows)
}

pub const STRESS_COLUMNS: [&str; 14] = [
    "n",
    "p",
    "stress",
    "trials",
    "delay_ms_mean",
    "delay_ms_ci",
    "deadline_rate_mean",
    "deadline_rate_ci",
    "feasible_rate_mean",
    "feasible_rate_ci",
    "edge_usage_mean",
    "edge_usage_ci",
    "migration_success_mean",
    "migration_success_ci",
];

/// Aggregate CSV. `timing` appends `runtime_ms_median`.
pub fn write_stress_csv(rows: &[StressRow], out: impl Write, timing: bool) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = STRESS_COLUMNS.to_vec();
    if timing {
        header.push("runtime_ms_median");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![
            r.n.to_string(),
            num(Some(r.p)),
            num(Some(r.stress)),
            r.trials.to_string(),
            num(Some(r.delay_ms_mean)),
            num(Some(r.delay_ms_ci)),
            num(Some(r.deadline_rate_mean)),
            num(Some(r.deadline_rate_ci)),
            num(Some(r.feasible_rate_mean)),
            num(Some(r.feasible_rate_ci)),
            num(Some(r.edge_usage_mean)),
            num(Some(r.edge_usage_ci)),
            num(Some(r.migration_success_mean)),
            num(Some(r.migration_success_ci)),
        ];
        if timing {
            row.push(num(Some(r.runtime_ms_median)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
