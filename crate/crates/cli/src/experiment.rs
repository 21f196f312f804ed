//! Batches of runs over schedulers and seeds, with per-run traces and
//! across-seed summaries.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kcover::metrics::LEVELS;
use kcover::{k_lifetime, run_simulation, LifetimeRule, SchedulerKind, SimulationConfig, SimulationOutput};
use rayon::prelude::*;
use serde::Deserialize;

use crate::csvio::{self, fmt6, write_file};
use crate::error::CliError;

pub const DEFAULT_LAMBDAS: [f64; 3] = [0.8, 0.9, 0.99];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SimulationConfig,
    pub schedulers: Vec<SchedulerKind>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub lambdas: Vec<f64>,
    /// Also write the CGS message logs.
    pub message_logs: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default)]
    base: SimulationConfig,
    schedulers: Vec<String>,
    seeds: Vec<u64>,
    output_dir: Option<PathBuf>,
    lambdas: Option<Vec<f64>>,
    #[serde(default)]
    message_logs: bool,
}

impl ExperimentSpec {
    /// Parses a TOML experiment file. Schedulers are names such as `cgs` or
    /// `random:0.25`; the base config sits under `[base]`.
    pub fn parse(text: &str, path: &Path, default_out: &Path) -> Result<Self, CliError> {
        let bad = |message: String| CliError::ConfigFile { path: path.to_path_buf(), message };
        let file: SpecFile = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let schedulers = file.schedulers.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(bad)?;
        Ok(Self {
            base: file.base,
            schedulers,
            seeds: file.seeds,
            output_dir: file.output_dir.unwrap_or_else(|| default_out.to_path_buf()),
            lambdas: file.lambdas.unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec()),
            message_logs: file.message_logs,
        })
    }

    pub fn load(path: &Path, default_out: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path, default_out)
    }

    /// CGS against both random baselines on the 10 x 10 grid.
    pub fn figure5(seeds: Vec<u64>, output_dir: PathBuf) -> Self {
        Self {
            base: SimulationConfig::figure5(SchedulerKind::Cgs),
            schedulers: vec![
                SchedulerKind::Cgs,
                SchedulerKind::Random { p_sleep: 0.4 },
                SchedulerKind::Random { p_sleep: 0.25 },
            ],
            seeds,
            output_dir,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            message_logs: false,
        }
    }

    pub fn configs(&self) -> Vec<SimulationConfig> {
        let mut out = Vec::with_capacity(self.schedulers.len() * self.seeds.len());
        for &scheduler in &self.schedulers {
            for &seed in &self.seeds {
                out.push(SimulationConfig { scheduler, seed, ..self.base.clone() });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schedulers.is_empty() || self.seeds.is_empty() {
            return Err(CliError::Experiment("at least one scheduler and one seed are required".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
            return Err(CliError::Experiment(format!("lambda {l} is outside (0, 1]")));
        }
        for c in self.configs() {
            c.validate()?;
        }
        Ok(())
    }
}

pub fn trace_file_name(scheduler: &SchedulerKind, seed: u64) -> String {
    format!("{}_seed{seed}.csv", scheduler.label())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub trace_path: PathBuf,
    pub output: SimulationOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeSummary {
    pub scheduler: String,
    pub k: usize,
    pub lambda: f64,
    pub mean: f64,
    pub min: u32,
    pub max: u32,
    pub mean_network_lifetime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub runs: Vec<RunResult>,
    pub summary_path: PathBuf,
    pub lifetimes_path: PathBuf,
    pub lifetimes: Vec<LifetimeSummary>,
}

/// Runs every (scheduler, seed) pair in parallel, then writes
/// `traces/<scheduler>_seed<seed>.csv`, `summary.csv` and `lifetimes.csv`
/// under the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, CliError> {
    spec.validate()?;
    let configs = spec.configs();
    let outputs: Vec<SimulationOutput> = configs.par_iter().map(run_simulation).collect::<Result<_, _>>()?;

    let dir = &spec.output_dir;
    let mut runs = Vec::with_capacity(outputs.len());
    for (config, output) in configs.iter().zip(outputs) {
        let name = trace_file_name(&config.scheduler, config.seed);
        let trace_path = dir.join("traces").join(&name);
        write_file(&trace_path, csvio::trace_to_string(&output.trace))?;
        if spec.message_logs && config.scheduler == SchedulerKind::Cgs {
            let mut buf = Vec::new();
            csvio::write_messages(&mut buf, &output.messages).expect("writing to memory");
            write_file(&dir.join("messages").join(&name), buf)?;
        }
        runs.push(RunResult { scheduler: config.scheduler, seed: config.seed, trace_path, output });
    }

    let summary_path = dir.join("summary.csv");
    write_file(&summary_path, summary_csv(&runs))?;
    let lifetimes = lifetime_summaries(&runs, &spec.lambdas)?;
    let lifetimes_path = dir.join("lifetimes.csv");
    write_file(&lifetimes_path, lifetimes_csv(&lifetimes))?;
    Ok(ExperimentReport { runs, summary_path, lifetimes_path, lifetimes })
}

fn group_by_scheduler(runs: &[RunResult]) -> Vec<(String, Vec<&RunResult>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&RunResult>> = BTreeMap::new();
    for r in runs {
        let label = r.scheduler.label();
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push(r);
    }
    order
        .into_iter()
        .map(|l| {
            let g = groups.remove(&l).unwrap();
            (l, g)
        })
        .collect()
}

pub const SUMMARY_HEADER: &str =
    "scheduler,period,runs,alive,awake,theta1,theta2,theta3,theta_p1,theta_p2,theta_p3,messages";

/// Per-scheduler, per-period means across seeds.
pub fn summary_csv(runs: &[RunResult]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (label, group) in group_by_scheduler(runs) {
        let periods: u32 =
            group.iter().flat_map(|r| r.output.trace.rows.iter().map(|row| row.period)).max().unwrap_or(0);
        for p in 1..=periods {
            let rows: Vec<_> = group.iter().filter_map(|r| r.output.trace.row(p)).collect();
            let n = rows.len() as f64;
            let mean = |f: &dyn Fn(&kcover::MetricsRow) -> f64| fmt6(rows.iter().map(|r| f(r)).sum::<f64>() / n);
            let mut fields = vec![
                label.clone(),
                p.to_string(),
                rows.len().to_string(),
                mean(&|r| r.alive as f64),
                mean(&|r| r.awake as f64),
            ];
            for i in 0..LEVELS {
                fields.push(mean(&|r| r.theta[i]));
            }
            for i in 0..LEVELS {
                fields.push(mean(&|r| r.theta_prime[i]));
            }
            fields.push(mean(&|r| r.messages as f64));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

/// k-lifetimes (prefix rule, area coverage) for k = 1..=3 and each lambda.
pub fn lifetime_summaries(runs: &[RunResult], lambdas: &[f64]) -> Result<Vec<LifetimeSummary>, CliError> {
    let mut out = Vec::new();
    for (label, group) in group_by_scheduler(runs) {
        let network = group.iter().map(|r| r.output.trace.network_lifetime() as f64).sum::<f64>() / group.len() as f64;
        for k in 1..=LEVELS {
            for &lambda in lambdas {
                let values = group
                    .iter()
                    .map(|r| k_lifetime(&r.output.trace, k, lambda, LifetimeRule::Prefix))
                    .collect::<Result<Vec<u32>, _>>()?;
                out.push(LifetimeSummary {
                    scheduler: label.clone(),
                    k,
                    lambda,
                    mean: values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64,
                    min: values.iter().copied().min().unwrap_or(0),
                    max: values.iter().copied().max().unwrap_or(0),
                    mean_network_lifetime: network,
                });
            }
        }
    }
    Ok(out)
}

pub fn lifetimes_csv(rows: &[LifetimeSummary]) -> String {
    let mut out =
        String::from("scheduler,k,lambda,mean_k_lifetime,min_k_lifetime,max_k_lifetime,mean_network_lifetime\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheduler,
            r.k,
            fmt6(r.lambda),
            fmt6(r.mean),
            r.min,
            r.max,
            fmt6(r.mean_network_lifetime)
        ));
    }
    out
}
