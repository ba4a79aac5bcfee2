//! Benchmark campaigns: configuration, supervised runs and log assembly.
//!
//! Runs execute one at a time. Each run gets its own worker thread, a
//! progress collector thread and the calling thread as supervisor.

mod config;
mod exec;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use thiserror::Error;

use crate::benchlog::{ExperimentLog, PlannerBlock, PropertyDecl, RunStatus};
use crate::geometry::ProblemDef;
use crate::paths::path_to_text;
use crate::planners::{PlannerError, PlannerFactory, PlannerSpec};
use crate::props::Value;

pub use config::{load_config, parse_config, DEFAULT_MEMORY_LIMIT_MB, DEFAULT_PROGRESS_INTERVAL};
pub use exec::{execute_run, progress_properties, standard_run_properties, Limits, RunRecord, GRACE_PERIOD};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config: missing key {key:?} in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("config: missing [{0}] section")]
    MissingSection(String),
    #[error("config: duplicate planner instance {0:?}")]
    DuplicateInstance(String),
    #[error("cannot load world {path}: {message}")]
    World { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("planner instance {instance}: {source}")]
    Planner {
        instance: String,
        #[source]
        source: PlannerError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SavePaths {
    #[default]
    None,
    Best,
    All,
}

impl fmt::Display for SavePaths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SavePaths::None => "none",
            SavePaths::Best => "best",
            SavePaths::All => "all",
        })
    }
}

impl FromStr for SavePaths {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(SavePaths::None),
            "best" => Ok(SavePaths::Best),
            "all" => Ok(SavePaths::All),
            _ => Err(format!("save_paths must be none, best or all, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    /// Experiment name; defaults to the problem's world name.
    pub name: String,
    pub problem: Arc<ProblemDef>,
    /// Problem description recorded in the log header.
    pub problem_properties: IndexMap<String, String>,
    pub planners: Vec<PlannerSpec>,
    /// Seconds.
    pub time_limit: f64,
    pub memory_limit_mb: f64,
    pub run_count: u64,
    pub seed: u64,
    pub save_paths: SavePaths,
    /// Seconds.
    pub progress_interval: f64,
}

impl BenchmarkSpec {
    pub fn limits(&self) -> Limits {
        Limits {
            time_limit: self.time_limit,
            memory_limit_bytes: (self.memory_limit_mb * 1024.0 * 1024.0) as u64,
            progress_interval: self.progress_interval,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Version string recorded in the log.
    pub version: String,
    /// Directory for saved paths; required when the spec saves paths.
    pub path_dir: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            version: crate::SUITE_VERSION.to_string(),
            path_dir: None,
        }
    }
}

pub fn hostname() -> String {
    ["/proc/sys/kernel/hostname", "/etc/hostname"]
        .iter()
        .find_map(|p| std::fs::read_to_string(p).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// First processor block of `/proc/cpuinfo`, or a short platform string.
pub fn cpuinfo() -> String {
    match std::fs::read_to_string("/proc/cpuinfo") {
        Ok(text) => text.split("\n\n").next().unwrap_or_default().trim_end().to_string(),
        Err(_) => format!("{} {}", std::env::consts::OS, std::env::consts::ARCH),
    }
}

pub fn run_benchmark(
    spec: &BenchmarkSpec,
    factory: &dyn PlannerFactory,
    options: &RunOptions,
) -> Result<ExperimentLog, RunnerError> {
    run_benchmark_with(spec, factory, options, |_, _, _| {})
}

/// Like [`run_benchmark`], calling `observer(instance, run_index, record)`
/// after every run.
pub fn run_benchmark_with(
    spec: &BenchmarkSpec,
    factory: &dyn PlannerFactory,
    options: &RunOptions,
    mut observer: impl FnMut(&PlannerSpec, u64, &RunRecord),
) -> Result<ExperimentLog, RunnerError> {
    let mut seen = Vec::new();
    let mut probes = Vec::with_capacity(spec.planners.len());
    for p in &spec.planners {
        if seen.contains(&&p.instance_name) {
            return Err(RunnerError::DuplicateInstance(p.instance_name.clone()));
        }
        seen.push(&p.instance_name);
        let probe = exec::probe_planner(factory, p, &spec.problem).map_err(|source| RunnerError::Planner {
            instance: p.instance_name.clone(),
            source,
        })?;
        probes.push(probe);
    }
    if spec.save_paths != SavePaths::None {
        let dir = options.path_dir.as_ref().ok_or_else(|| RunnerError::Io {
            path: PathBuf::new(),
            message: "saving paths requires an output directory".into(),
        })?;
        std::fs::create_dir_all(dir).map_err(|e| RunnerError::Io {
            path: dir.clone(),
            message: e.to_string(),
        })?;
    }

    let date = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let started = Instant::now();
    let limits = spec.limits();
    let mut blocks = Vec::with_capacity(spec.planners.len());
    for (pspec, (settings, extras, reports_progress)) in spec.planners.iter().zip(probes) {
        let mut run_schema: Vec<PropertyDecl> = standard_run_properties()
            .into_iter()
            .map(|(n, t)| PropertyDecl::new(n, t))
            .collect();
        for (n, t) in extras {
            if !run_schema.iter().any(|d| d.name == n) {
                run_schema.push(PropertyDecl::new(n, t));
            }
        }
        let progress_schema: Vec<PropertyDecl> = progress_properties()
            .into_iter()
            .map(|(n, t)| PropertyDecl::new(n, t))
            .collect();
        let mut full_settings = IndexMap::new();
        full_settings.insert("type".to_string(), pspec.planner_type.to_uppercase());
        full_settings.extend(settings);

        let mut runs = Vec::with_capacity(spec.run_count as usize);
        let mut best: Option<(f64, u64, Vec<crate::geometry::State>)> = None;
        for run in 0..spec.run_count {
            let record = execute_run(factory, pspec, &spec.problem, &limits, spec.seed.wrapping_add(run));
            observer(pspec, run, &record);
            if let Some(path) = &record.path {
                match spec.save_paths {
                    SavePaths::All => save_path(spec, options, &pspec.instance_name, run, path)?,
                    SavePaths::Best if record.status == RunStatus::ExactSolution => {
                        let len = record.real("solution_length").unwrap_or(f64::INFINITY);
                        if best.as_ref().is_none_or(|(b, _, _)| len < *b) {
                            best = Some((len, run, path.clone()));
                        }
                    }
                    _ => {}
                }
            }
            let values = run_schema
                .iter()
                .map(|d| record.properties.get(&d.name).cloned().flatten())
                .collect();
            let progress = record
                .progress
                .iter()
                .map(|s| {
                    vec![
                        Some(Value::Real(s.t)),
                        s.best_cost.map(Value::Real),
                        Some(Value::Integer(s.iterations as i64)),
                    ]
                })
                .collect();
            runs.push(crate::benchlog::RunRecord { values, progress });
        }
        if let Some((_, run, path)) = best {
            save_path(spec, options, &pspec.instance_name, run, &path)?;
        }
        blocks.push(PlannerBlock {
            name: pspec.instance_name.clone(),
            settings: full_settings,
            run_schema,
            runs,
            progress_schema,
            has_progress: reports_progress,
        });
    }

    Ok(ExperimentLog {
        name: spec.name.clone(),
        version: options.version.clone(),
        hostname: hostname(),
        cpuinfo: cpuinfo(),
        date,
        seed: spec.seed,
        time_limit: spec.time_limit,
        memory_limit_mb: spec.memory_limit_mb,
        run_count: spec.run_count,
        total_time: started.elapsed().as_secs_f64(),
        problem_properties: spec.problem_properties.clone(),
        planners: blocks,
    })
}

fn save_path(
    spec: &BenchmarkSpec,
    options: &RunOptions,
    instance: &str,
    run: u64,
    path: &[crate::geometry::State],
) -> Result<(), RunnerError> {
    let dir = options.path_dir.as_ref().expect("checked before the runs");
    let file = dir.join(format!("{}_{}_{}.path", spec.name, instance, run));
    std::fs::write(&file, path_to_text(path, spec.problem.space.kind)).map_err(|e| RunnerError::Io {
        path: file,
        message: e.to_string(),
    })
}
