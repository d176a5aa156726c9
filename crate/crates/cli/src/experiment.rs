//! Seeded multi-run experiments and their on-disk outputs.
//!
//! `run` writes, into the output directory:
//!
//! - `trace_<algo>_<run>.csv`: `t,arm,reward_event,collected_reward` per round,
//!   `arm` being the arm id;
//! - `aggregate_<algo>.csv`: mean and sample standard deviation of regret,
//!   violation, cumulative reward and reward/violation ratio on a log grid
//!   (an empty ratio cell means the ratio is undefined at that round);
//! - `summary.json`: instance, stationary optimum, dual certificate, slack
//!   thresholds and bound report.
//!
//! Run `r` of every algorithm uses seed `base_seed + r`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lincon::env::{load_arms_csv, synth_instance, write_arms_csv, BanditInstance};
use lincon::metrics::{aggregate_runs, log_grid, AggregateSeries, MetricSeries};
use lincon::policy::{run_policy, RunTrace};
use lincon::rng::seeded;
use lincon::theory::{optimal_structure, theorem_bounds, BoundReport, OptimalStructure};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Algo, ExperimentConfig, InstanceSource};
use crate::error::CliError;

pub const AGGREGATE_HEADER: &str = "t,regret_mean,regret_std,violation_mean,violation_std,cumreward_mean,cumreward_std,ratio_mean,ratio_std";
pub const TRACE_HEADER: &str = "t,arm,reward_event,collected_reward";

pub fn load_instance(config: &ExperimentConfig) -> Result<BanditInstance, CliError> {
    let instance = match &config.instance {
        InstanceSource::Csv(path) => load_arms_csv(path, config.eta).map_err(|e| match e {
            lincon::Error::Io(io) => io_err(path, io),
            other => other.into(),
        })?,
        InstanceSource::Synthetic { kind, n, seed } => {
            let eta = config.eta.unwrap_or(kind.default_eta());
            synth_instance(*kind, *n, eta, &mut seeded(*seed))?
        }
    };
    instance.ensure_feasible()?;
    Ok(instance)
}

#[derive(Debug, Clone, Serialize)]
pub struct ArmEntry {
    pub id: u64,
    pub mu: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub name: String,
    pub eta: f64,
    pub n: usize,
    pub arms: Vec<ArmEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualsSummary {
    pub lambda: f64,
    pub nu: f64,
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuboptimalArm {
    pub id: u64,
    pub xi: f64,
    pub delta_plus: f64,
    pub small_delta_plus: f64,
    pub kl_mu_xi: f64,
    pub y: f64,
    pub z: f64,
    pub l_t: f64,
    pub epsilon1: Option<f64>,
    pub delta_prime: Option<f64>,
    pub vacuous: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsSummary {
    pub gamma: f64,
    pub horizon: f64,
    pub regret_leading: f64,
    pub regret_sqrt: f64,
    pub violation_leading: f64,
    pub violation_sqrt: f64,
    pub remainder: String,
    pub arms: Vec<SuboptimalArm>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalMetrics {
    pub algorithm: String,
    pub runs: usize,
    pub regret_mean: f64,
    pub regret_std: f64,
    pub violation_mean: f64,
    pub violation_std: f64,
    pub cumreward_mean: f64,
    pub cumreward_std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub horizon: u64,
    pub runs: usize,
    pub base_seed: u64,
    pub klucb_c: f64,
    pub results: Vec<FinalMetrics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub instance: InstanceSummary,
    pub x_star: Vec<f64>,
    pub r_star: f64,
    pub duals: DualsSummary,
    /// Slack threshold per arm; `null` for support arms.
    pub xi: Vec<Option<f64>>,
    pub bounds: BoundsSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSummary>,
}

impl Summary {
    fn new(instance: &BanditInstance, structure: &OptimalStructure, report: &BoundReport) -> Self {
        let arms = report
            .arms
            .iter()
            .map(|a| SuboptimalArm {
                id: instance.ids[a.arm],
                xi: a.xi,
                delta_plus: a.delta_plus,
                small_delta_plus: a.small_delta_plus,
                kl_mu_xi: a.kl_mu_xi,
                y: a.y,
                z: a.z,
                l_t: a.l_t,
                epsilon1: a.epsilon1,
                delta_prime: a.delta_prime,
                vacuous: a.vacuous.clone(),
            })
            .collect();
        Summary {
            instance: InstanceSummary {
                name: instance.name.clone(),
                eta: instance.eta,
                n: instance.n_arms(),
                arms: instance
                    .ids
                    .iter()
                    .zip(&instance.arms)
                    .map(|(&id, a)| ArmEntry {
                        id,
                        mu: a.mu,
                        r: a.r,
                    })
                    .collect(),
            },
            x_star: structure.solution.x.clone(),
            r_star: structure.solution.objective,
            duals: DualsSummary {
                lambda: structure.duals.lambda,
                nu: structure.duals.nu,
                psi: structure.duals.psi.clone(),
            },
            xi: structure.xi.clone(),
            bounds: BoundsSummary {
                gamma: report.gamma,
                horizon: report.horizon,
                regret_leading: report.regret_leading,
                regret_sqrt: report.regret_sqrt,
                violation_leading: report.violation_leading,
                violation_sqrt: report.violation_sqrt,
                remainder: report.remainder.clone(),
                arms,
            },
            experiment: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

fn analyze(instance: &BanditInstance, config: &ExperimentConfig) -> Result<Summary, CliError> {
    let structure = optimal_structure(instance)?;
    let report = theorem_bounds(instance, config.gamma, config.horizon)?;
    Ok(Summary::new(instance, &structure, &report))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Stationary optimum, duals and bound terms without simulating.
pub fn report_bounds(config: &ExperimentConfig) -> Result<Summary, CliError> {
    let instance = load_instance(config)?;
    let summary = analyze(&instance, config)?;
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        write_file(&dir.join("summary.json"), &summary.to_json())?;
    }
    Ok(summary)
}

pub fn trace_path(dir: &Path, algo: Algo, run: usize) -> PathBuf {
    dir.join(format!("trace_{}_{run:03}.csv", algo.name()))
}

pub fn aggregate_path(dir: &Path, algo: Algo) -> PathBuf {
    dir.join(format!("aggregate_{}.csv", algo.name()))
}

pub fn write_trace(
    path: &Path,
    trace: &RunTrace,
    instance: &BanditInstance,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let result = (|| {
        writeln!(out, "{TRACE_HEADER}")?;
        for rec in &trace.rounds {
            writeln!(
                out,
                "{},{},{},{}",
                rec.t,
                instance.ids[rec.arm],
                u8::from(rec.reward_event),
                rec.collected_reward
            )?;
        }
        out.flush()
    })();
    result.map_err(|e| io_err(path, e))
}

pub fn format_aggregate(agg: &AggregateSeries) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::with_capacity(64 * agg.t_grid.len());
    s.push_str(AGGREGATE_HEADER);
    s.push('\n');
    for j in 0..agg.t_grid.len() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            agg.t_grid[j],
            agg.regret_mean[j],
            agg.regret_std[j],
            agg.violation_mean[j],
            agg.violation_std[j],
            agg.cum_reward_mean[j],
            agg.cum_reward_std[j],
            opt(agg.ratio_mean[j]),
            opt(agg.ratio_std[j]),
        ));
    }
    s
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Summary,
    /// One aggregate per configured algorithm, in configuration order.
    pub aggregates: Vec<(Algo, AggregateSeries)>,
    pub files: Vec<PathBuf>,
}

/// Runs every configured algorithm `runs` times and writes the outputs.
///
/// Runs execute on up to `jobs` threads. Each run owns its random stream and
/// results are collected in run order, so outputs do not depend on `jobs`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    let horizon = config.rounds()?;
    let instance = load_instance(config)?;
    if horizon < instance.n_arms() as u64 {
        return Err(CliError::Config(format!(
            "horizon {horizon} is shorter than the number of arms {}",
            instance.n_arms()
        )));
    }
    let mut summary = analyze(&instance, config)?;
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Config("--out is required for run".into()))?;
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;

    let grid = log_grid(horizon, config.grid_points);
    let jobs: Vec<(Algo, usize)> = config
        .algorithms
        .iter()
        .flat_map(|&algo| (0..config.runs).map(move |run| (algo, run)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| {
            CliError::Config(format!("cannot start {} worker threads: {e}", config.jobs))
        })?;
    let series: Vec<MetricSeries> = pool.install(|| {
        jobs.par_iter()
            .map(|&(algo, run)| -> Result<MetricSeries, CliError> {
                let seed = config.base_seed.wrapping_add(run as u64);
                let trace = run_policy(algo.policy(config.klucb_c), &instance, horizon, seed)?;
                write_trace(&trace_path(&dir, algo, run), &trace, &instance)?;
                Ok(MetricSeries::from_trace(&trace, &instance, &grid)?)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut files: Vec<PathBuf> = jobs
        .iter()
        .map(|&(algo, run)| trace_path(&dir, algo, run))
        .collect();
    let mut aggregates = Vec::new();
    let mut results = Vec::new();
    for (k, &algo) in config.algorithms.iter().enumerate() {
        let runs = &series[k * config.runs..(k + 1) * config.runs];
        let agg = aggregate_runs(runs)?;
        let path = aggregate_path(&dir, algo);
        write_file(&path, &format_aggregate(&agg))?;
        files.push(path);

        let last = agg.t_grid.len() - 1;
        results.push(FinalMetrics {
            algorithm: algo.name().to_owned(),
            runs: agg.runs,
            regret_mean: agg.regret_mean[last],
            regret_std: agg.regret_std[last],
            violation_mean: agg.violation_mean[last],
            violation_std: agg.violation_std[last],
            cumreward_mean: agg.cum_reward_mean[last],
            cumreward_std: agg.cum_reward_std[last],
        });
        aggregates.push((algo, agg));
    }

    summary.experiment = Some(ExperimentSummary {
        horizon,
        runs: config.runs,
        base_seed: config.base_seed,
        klucb_c: config.klucb_c,
        results,
    });
    let path = dir.join("summary.json");
    write_file(&path, &summary.to_json())?;
    files.push(path);

    Ok(ExperimentOutcome {
        summary,
        aggregates,
        files,
    })
}

/// Writes a synthetic instance in the arm CSV schema.
pub fn generate<W: Write>(config: &ExperimentConfig, out: W) -> Result<BanditInstance, CliError> {
    let InstanceSource::Synthetic { kind, n, seed } = config.instance else {
        return Err(CliError::Config("gen needs --synthetic".into()));
    };
    let eta = config.eta.unwrap_or(kind.default_eta());
    let instance = synth_instance(kind, n, eta, &mut seeded(seed))?;
    write_arms_csv(&instance, out)?;
    Ok(instance)
}
