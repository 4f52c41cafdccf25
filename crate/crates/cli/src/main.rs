//! `robovf`: solve scenarios, run episodes and stress sweeps, generate
//! random topologies.
//!
//! Exit codes: 0 feasible (or the run completed), 2 infeasible, 1 error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use robovf::feasibility::{check_embedding, delay_report, objective};
use robovf::oracle::{optimal_solve_with, OracleError, OracleOptions};
use robovf::scenario::Scenario;
use robovf::sim::{run_episode, stress_sweep, write_steps_csv, write_stress_csv, StressConfig, StressRow};
use robovf::solver::{solve, Algorithm, SolveError};
use robovf::topology::{stress_scenario, TopologyParams};
use serde_json::json;

#[derive(Parser)]
#[command(name = "robovf", version, about = "Place robotic VFs across robot, Edge and Cloud")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a scenario once and write the result as JSON.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "dlmd")]
        algo: Algorithm,
    },
    /// Exhaustive optimum of a small scenario.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Largest search space to enumerate.
        #[arg(long, default_value_t = OracleOptions::default().budget)]
        budget: u64,
        /// Candidate paths per VL.
        #[arg(long, default_value_t = OracleOptions::default().k)]
        k: usize,
    },
    /// Follow the scenario's trace and write one CSV row per step.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "dlmd")]
        algo: Algorithm,
        /// Seed for signal shadowing.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-step CSV; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON summary of the episode.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Add wall-clock solver runtimes (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Stress sweep over random graphs.
    Stress {
        /// Graph sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [48, 128])]
        n: Vec<usize>,
        /// Edge probability per size; defaults to 0.25 for n = 48 and 0.1 for n = 128.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.2, 0.4, 0.6, 0.8])]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trace steps between consecutive PoAs.
        #[arg(long, default_value_t = 5)]
        steps_per_segment: usize,
        /// Aggregate CSV; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Add the median solver runtime column.
        #[arg(long)]
        timing: bool,
    },
    /// Write a random stress scenario.
    GenTopology {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        steps_per_segment: usize,
        /// Scenario file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    scenario: PathBuf,
    /// Result file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ROBOVF_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve { input, algo } => {
            let scenario = load(&input.scenario)?;
            let graph = scenario.validate()?;
            let radio = scenario.static_radio(&graph)?;
            let result = solve(algo, &graph, &scenario.services, &radio, scenario.options.alpha);
            report(&scenario, algo, result, input.output.as_deref())
        }
        Command::Oracle { input, budget, k } => {
            let scenario = load(&input.scenario)?;
            let graph = scenario.validate()?;
            let radio = scenario.static_radio(&graph)?;
            let result = optimal_solve_with(&graph, &scenario.services, &radio, &OracleOptions { budget, k })
                .map(|s| s.embedding)
                .map_err(SolveError::from);
            report(&scenario, Algorithm::Oracle, result, input.output.as_deref())
        }
        Command::Simulate {
            scenario,
            algo,
            seed,
            csv,
            summary,
            timing,
        } => {
            let s = load(&scenario)?;
            if s.trace.is_none() {
                bail!("{} has no trace section", scenario.display());
            }
            let episode = run_episode(&s, algo, seed)?;
            write_steps_csv(&episode.records, sink(csv.as_deref())?, timing)?;
            if let Some(path) = summary {
                let sum = if timing { episode.timed_summary() } else { episode.summary.clone() };
                let mut w = sink(Some(&path))?;
                serde_json::to_writer_pretty(&mut w, &sum)?;
                writeln!(w)?;
            }
            log::info!(
                "{} steps, deadline met at {:.1}%",
                episode.summary.steps,
                episode.summary.deadline_rate * 100.0
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Stress {
            n,
            p,
            levels,
            trials,
            seed,
            steps_per_segment,
            csv,
            timing,
        } => {
            if !p.is_empty() && p.len() != n.len() {
                bail!("give one --p per --n ({} sizes, {} probabilities)", n.len(), p.len());
            }
            let mut rows: Vec<StressRow> = Vec::new();
            for (i, &size) in n.iter().enumerate() {
                let prob = match p.get(i) {
                    Some(&v) => v,
                    None => default_p(size)?,
                };
                let cfg = StressConfig {
                    params: TopologyParams::new(size, prob),
                    levels: levels.clone(),
                    trials,
                    seed,
                    steps_per_segment,
                };
                rows.extend(stress_sweep(&cfg)?);
            }
            write_stress_csv(&rows, sink(csv.as_deref())?, timing)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GenTopology {
            n,
            p,
            seed,
            steps_per_segment,
            output,
        } => {
            let p = match p {
                Some(p) => p,
                None => default_p(n)?,
            };
            let s = stress_scenario(&TopologyParams::new(n, p), seed, steps_per_segment)?;
            let mut w = sink(output.as_deref())?;
            writeln!(w, "{}", s.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("cannot load {}", path.display()))
}

fn default_p(n: usize) -> Result<f64> {
    match n {
        48 => Ok(0.25),
        128 => Ok(0.1),
        _ => bail!("no default edge probability for n = {n}; pass --p"),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Write the solve result and map it to an exit code.
fn report(
    scenario: &Scenario,
    algo: Algorithm,
    result: Result<robovf::model::Embedding, SolveError>,
    output: Option<&Path>,
) -> Result<ExitCode> {
    let graph = scenario.graph()?;
    let radio = scenario.static_radio(&graph)?;
    let doc = match &result {
        Ok(e) => {
            let violations = check_embedding(&graph, &scenario.services, e, &radio);
            let delays: Vec<_> = scenario.services.iter().map(|s| delay_report(&graph, s, e)).collect();
            json!({
                "schema_version": 1,
                "algorithm": algo,
                "feasible": violations.is_empty(),
                "objective": objective(&graph, e),
                "embedding": e,
                "delays": delays,
                "violations": violations,
                "error": null,
            })
        }
        Err(SolveError::Oracle(e @ (OracleError::BudgetExceeded { .. } | OracleError::NotIdeal(_)))) => {
            bail!("{e}")
        }
        Err(e) => json!({
            "schema_version": 1,
            "algorithm": algo,
            "feasible": false,
            "objective": null,
            "embedding": null,
            "delays": [],
            "violations": [],
            "error": e.to_string(),
        }),
    };
    let mut w = sink(output)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(if doc["feasible"] == true { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
