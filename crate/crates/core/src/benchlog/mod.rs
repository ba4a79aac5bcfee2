//! Plain-text benchmark log format.
//!
//! One experiment per file: a header, then one block per planner instance
//! holding its settings, the declared run properties, one `; `-separated
//! line per run and optional progress streams. Absent values are written
//! as `N/A`.

mod parse;
mod write;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::props::{TypeTag, Value};

pub use parse::parse_log;
pub use write::{format_real, write_log};

pub const ABSENT_MARKER: &str = "N/A";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid property name {0:?}")]
    InvalidName(String),
    #[error("planner {planner}: property {name} declared twice")]
    DuplicateProperty { planner: String, name: String },
    #[error("planner {planner}, run {run}: {found} values for {declared} declared properties")]
    ColumnCount {
        planner: String,
        run: usize,
        found: usize,
        declared: usize,
    },
    #[error("planner {planner}: value for {name} does not match its type {tag}")]
    TypeMismatch {
        planner: String,
        name: String,
        tag: TypeTag,
    },
    #[error("planner {planner}: {found} progress streams for {runs} runs")]
    ProgressCount { planner: String, found: usize, runs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i64)]
pub enum RunStatus {
    ExactSolution = 0,
    ApproximateSolution = 1,
    Timeout = 2,
    MemoryLimit = 3,
    Crash = 4,
}

impl RunStatus {
    pub const ALL: [RunStatus; 5] = [
        RunStatus::ExactSolution,
        RunStatus::ApproximateSolution,
        RunStatus::Timeout,
        RunStatus::MemoryLimit,
        RunStatus::Crash,
    ];

    pub fn code(self) -> i64 {
        self as i64
    }

    pub fn from_code(code: i64) -> Option<RunStatus> {
        RunStatus::ALL.into_iter().find(|s| s.code() == code)
    }

    pub fn label(self) -> &'static str {
        match self {
            RunStatus::ExactSolution => "EXACT_SOLUTION",
            RunStatus::ApproximateSolution => "APPROXIMATE_SOLUTION",
            RunStatus::Timeout => "TIMEOUT",
            RunStatus::MemoryLimit => "MEMORY_LIMIT",
            RunStatus::Crash => "CRASH",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RunStatus::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| format!("unknown run status {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDecl {
    pub name: String,
    pub tag: TypeTag,
}

impl PropertyDecl {
    pub fn new(name: impl Into<String>, tag: TypeTag) -> Self {
        PropertyDecl { name: name.into(), tag }
    }
}

/// One run: values aligned with the planner's run schema, plus its
/// progress stream (tuples aligned with the progress schema).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub values: Vec<Option<Value>>,
    pub progress: Vec<Vec<Option<Value>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlannerBlock {
    pub name: String,
    pub settings: IndexMap<String, String>,
    pub run_schema: Vec<PropertyDecl>,
    pub runs: Vec<RunRecord>,
    pub progress_schema: Vec<PropertyDecl>,
    /// Whether the block carries a progress section with one stream per run.
    pub has_progress: bool,
}

impl PlannerBlock {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.run_schema.iter().position(|d| d.name == name)
    }

    /// Value of `name` in run `run`; `None` when absent or undeclared.
    pub fn value(&self, run: usize, name: &str) -> Option<&Value> {
        self.column(name).and_then(|c| self.runs[run].values[c].as_ref())
    }

    pub fn status(&self, run: usize) -> Option<RunStatus> {
        match self.value(run, "status")? {
            Value::Enum(c) | Value::Integer(c) => RunStatus::from_code(*c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentLog {
    pub name: String,
    pub version: String,
    pub hostname: String,
    pub cpuinfo: String,
    pub date: String,
    pub seed: u64,
    /// Seconds.
    pub time_limit: f64,
    pub memory_limit_mb: f64,
    pub run_count: u64,
    /// Seconds.
    pub total_time: f64,
    pub problem_properties: IndexMap<String, String>,
    pub planners: Vec<PlannerBlock>,
}

impl ExperimentLog {
    /// Checks names, duplicate declarations, column counts and value types.
    pub fn validate(&self) -> Result<(), LogError> {
        for p in &self.planners {
            check_schema(&p.name, &p.run_schema)?;
            check_schema(&p.name, &p.progress_schema)?;
            for (i, run) in p.runs.iter().enumerate() {
                if run.values.len() != p.run_schema.len() {
                    return Err(LogError::ColumnCount {
                        planner: p.name.clone(),
                        run: i,
                        found: run.values.len(),
                        declared: p.run_schema.len(),
                    });
                }
                check_types(&p.name, &p.run_schema, &run.values)?;
                if !p.has_progress && !run.progress.is_empty() {
                    return Err(LogError::ProgressCount {
                        planner: p.name.clone(),
                        found: 1,
                        runs: 0,
                    });
                }
                for tuple in &run.progress {
                    if tuple.len() != p.progress_schema.len() {
                        return Err(LogError::ColumnCount {
                            planner: p.name.clone(),
                            run: i,
                            found: tuple.len(),
                            declared: p.progress_schema.len(),
                        });
                    }
                    check_types(&p.name, &p.progress_schema, tuple)?;
                }
            }
        }
        Ok(())
    }
}

fn check_schema(planner: &str, schema: &[PropertyDecl]) -> Result<(), LogError> {
    for (i, d) in schema.iter().enumerate() {
        if !crate::props::is_valid_property_name(&d.name) {
            return Err(LogError::InvalidName(d.name.clone()));
        }
        if schema[..i].iter().any(|e| e.name == d.name) {
            return Err(LogError::DuplicateProperty {
                planner: planner.to_string(),
                name: d.name.clone(),
            });
        }
    }
    Ok(())
}

fn check_types(planner: &str, schema: &[PropertyDecl], values: &[Option<Value>]) -> Result<(), LogError> {
    for (d, v) in schema.iter().zip(values) {
        if let Some(v) = v {
            if v.tag() != d.tag {
                return Err(LogError::TypeMismatch {
                    planner: planner.to_string(),
                    name: d.name.clone(),
                    tag: d.tag,
                });
            }
        }
    }
    Ok(())
}
