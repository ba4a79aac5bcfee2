//! Sampling-based planners behind one `Planner` interface.
//!
//! Non-optimizing: RRT, RRT-Connect, PRM. Optimizing: RRT*, PRM*.
//! Kinodynamic: control-sampling RRT for the first-order car.

mod car;
mod cost;
mod crrt;
mod nn;
mod params;
mod prm;
mod progress;
mod rrt;
mod rrt_connect;
mod rrt_star;
mod termination;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ProblemDef, SpaceKind, State};
use crate::props::{TypeTag, Value};

pub use car::{propagate_car, propagate_car_trajectory, Car1Control, CarModel};
pub use nn::{nearest_neighbor, nearest_neighbors};
pub use progress::{
    memory_estimate, new_sink, ProgressCell, ProgressSample, ProgressSink, Snapshot, EDGE_BYTES, NODE_OVERHEAD_BYTES,
    STATE_BYTES,
};
pub use termination::TerminationCondition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("unknown planner type {0:?} (expected RRT, RRTCONNECT, PRM, RRTSTAR, PRMSTAR or CRRT)")]
    UnknownType(String),
    #[error("planner {planner}: unknown parameter {name:?} (known: {})", known.join(", "))]
    UnknownParameter {
        planner: String,
        name: String,
        known: Vec<String>,
    },
    #[error("planner {planner}: bad value {value:?} for {name}: {reason}")]
    BadParameterValue {
        planner: String,
        name: String,
        value: String,
        reason: String,
    },
    #[error("planner {planner} cannot plan in a {space} space")]
    IncompatibleSpace { planner: String, space: SpaceKind },
    #[error("start state is invalid")]
    InvalidStart,
    #[error("goal state is invalid")]
    InvalidGoal,
    #[error("nearest-neighbor query on an empty point set")]
    EmptyPointSet,
    #[error("{0}")]
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlannerType {
    Rrt,
    RrtConnect,
    Prm,
    RrtStar,
    PrmStar,
    Crrt,
}

impl PlannerType {
    pub const ALL: [PlannerType; 6] = [
        PlannerType::Rrt,
        PlannerType::RrtConnect,
        PlannerType::Prm,
        PlannerType::RrtStar,
        PlannerType::PrmStar,
        PlannerType::Crrt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerType::Rrt => "RRT",
            PlannerType::RrtConnect => "RRTCONNECT",
            PlannerType::Prm => "PRM",
            PlannerType::RrtStar => "RRTSTAR",
            PlannerType::PrmStar => "PRMSTAR",
            PlannerType::Crrt => "CRRT",
        }
    }

    pub fn is_optimizing(self) -> bool {
        matches!(self, PlannerType::RrtStar | PlannerType::PrmStar)
    }

    pub fn supports(self, kind: SpaceKind) -> bool {
        match self {
            PlannerType::Crrt => kind == SpaceKind::Car1,
            _ => kind != SpaceKind::Car1,
        }
    }
}

impl fmt::Display for PlannerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerType {
    type Err = PlannerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_uppercase()
            .replace('*', "STAR");
        PlannerType::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| PlannerError::UnknownType(s.to_string()))
    }
}

/// A named planner instance as configured by the user. Parameters stay
/// untyped text until the planner is created.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSpec {
    pub instance_name: String,
    pub planner_type: String,
    pub params: IndexMap<String, String>,
}

impl PlannerSpec {
    pub fn new(instance_name: impl Into<String>, planner_type: impl Into<String>) -> Self {
        PlannerSpec {
            instance_name: instance_name.into(),
            planner_type: planner_type.into(),
            params: IndexMap::new(),
        }
    }

    pub fn param(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    ExactSolution,
    ApproximateSolution,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerResult {
    pub status: SolveStatus,
    /// Present for exact and approximate solutions.
    pub path: Option<Vec<State>>,
    /// Distance from the best reached state to the goal: zero for exact
    /// solutions, absent on timeout.
    pub solution_difference: Option<f64>,
    /// Objective cost of the returned path as tracked by the planner.
    pub best_cost: Option<f64>,
    /// Always contains `graph_states` and `iterations`.
    pub run_properties: IndexMap<String, Value>,
    pub memory_estimate: u64,
}

pub trait Planner: Send {
    fn planner_type(&self) -> &str;

    /// Effective parameter values, defaults included.
    fn settings(&self) -> IndexMap<String, String>;

    /// Planner-specific run properties beyond `graph_states` and `iterations`.
    fn extra_properties(&self) -> Vec<(String, TypeTag)> {
        Vec::new()
    }

    /// Whether the planner publishes best-cost progress samples.
    fn reports_progress(&self) -> bool {
        false
    }

    /// Attaches the cell through which the planner publishes its counters.
    /// Must be called before `solve`.
    fn register_progress_sink(&mut self, sink: ProgressSink);

    fn solve(&mut self, tc: &TerminationCondition, seed: u64) -> Result<PlannerResult, PlannerError>;
}

/// Builds planner instances from specs; the runner goes through this so
/// that additional planner types can be plugged in.
pub trait PlannerFactory: Send + Sync {
    fn create(&self, spec: &PlannerSpec, problem: &Arc<ProblemDef>) -> Result<Box<dyn Planner>, PlannerError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinPlanners;

impl PlannerFactory for BuiltinPlanners {
    fn create(&self, spec: &PlannerSpec, problem: &Arc<ProblemDef>) -> Result<Box<dyn Planner>, PlannerError> {
        create_planner(spec, problem)
    }
}

pub fn create_planner(spec: &PlannerSpec, problem: &Arc<ProblemDef>) -> Result<Box<dyn Planner>, PlannerError> {
    let ty: PlannerType = spec.planner_type.parse()?;
    if !ty.supports(problem.space.kind) {
        return Err(PlannerError::IncompatibleSpace {
            planner: ty.as_str().to_string(),
            space: problem.space.kind,
        });
    }
    let p = problem.clone();
    Ok(match ty {
        PlannerType::Rrt => Box::new(rrt::Rrt::new(p, &spec.params)?),
        PlannerType::RrtConnect => Box::new(rrt_connect::RrtConnect::new(p, &spec.params)?),
        PlannerType::Prm => Box::new(prm::Prm::new(p, &spec.params, false)?),
        PlannerType::PrmStar => Box::new(prm::Prm::new(p, &spec.params, true)?),
        PlannerType::RrtStar => Box::new(rrt_star::RrtStar::new(p, &spec.params)?),
        PlannerType::Crrt => Box::new(crrt::Crrt::new(p, &spec.params)?),
    })
}

/// Rejects invalid start or goal before any iteration.
pub(crate) fn check_endpoints(problem: &ProblemDef) -> Result<(), PlannerError> {
    if !problem.is_state_valid(&problem.start) {
        return Err(PlannerError::InvalidStart);
    }
    if !problem.space.in_bounds(&problem.goal) || !problem.is_state_valid(&problem.goal) {
        return Err(PlannerError::InvalidGoal);
    }
    Ok(())
}

/// Parent-pointer tree shared by the tree planners.
#[derive(Debug, Default)]
pub(crate) struct Tree {
    pub states: Vec<State>,
    pub parent: Vec<usize>,
}

pub(crate) const NO_PARENT: usize = usize::MAX;

impl Tree {
    pub fn with_root(root: State) -> Self {
        Tree {
            states: vec![root],
            parent: vec![NO_PARENT],
        }
    }

    pub fn add(&mut self, s: State, parent: usize) -> usize {
        self.states.push(s);
        self.parent.push(parent);
        self.states.len() - 1
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Root-to-node state sequence.
    pub fn path_to(&self, mut i: usize) -> Vec<State> {
        let mut out = vec![self.states[i]];
        while self.parent[i] != NO_PARENT {
            i = self.parent[i];
            out.push(self.states[i]);
        }
        out.reverse();
        out
    }
}

/// Appends the exact goal when the final connecting motion is valid.
pub(crate) fn finish_at_goal(problem: &ProblemDef, mut path: Vec<State>) -> Vec<State> {
    let last = *path.last().expect("nonempty path");
    if !last.bit_eq(&problem.goal) && problem.check_motion(&last, &problem.goal) {
        path.push(problem.goal);
    }
    path
}

/// Result for a start that already satisfies the goal.
pub(crate) fn trivial_result(problem: &ProblemDef) -> PlannerResult {
    PlannerResult {
        status: SolveStatus::ExactSolution,
        path: Some(vec![problem.start]),
        solution_difference: Some(0.0),
        best_cost: Some(0.0),
        run_properties: base_properties(1, 0),
        memory_estimate: memory_estimate(1, 0),
    }
}

pub(crate) fn base_properties(graph_states: usize, iterations: u64) -> IndexMap<String, Value> {
    let mut m = IndexMap::new();
    m.insert("graph_states".into(), Value::Integer(graph_states as i64));
    m.insert("iterations".into(), Value::Integer(iterations as i64));
    m
}

/// Exact, approximate or timeout outcome from the best state reached.
pub(crate) fn unsolved_result(
    problem: &ProblemDef,
    closest: Option<(Vec<State>, f64)>,
    run_properties: IndexMap<String, Value>,
    memory: u64,
) -> PlannerResult {
    let start_gap = problem.space.distance(&problem.start, &problem.goal);
    match closest {
        Some((path, gap)) if gap < start_gap => PlannerResult {
            status: SolveStatus::ApproximateSolution,
            path: Some(path),
            solution_difference: Some(gap),
            best_cost: None,
            run_properties,
            memory_estimate: memory,
        },
        _ => PlannerResult {
            status: SolveStatus::Timeout,
            path: None,
            solution_difference: None,
            best_cost: None,
            run_properties,
            memory_estimate: memory,
        },
    }
}

/// Publishes counters to an optional sink.
#[derive(Debug, Default, Clone)]
pub(crate) struct Publisher {
    sink: Option<ProgressSink>,
}

impl Publisher {
    pub fn set(&mut self, sink: ProgressSink) {
        self.sink = Some(sink);
    }

    #[inline]
    pub fn publish(&self, snap: Snapshot) {
        if let Some(s) = &self.sink {
            s.publish(snap);
        }
    }
}
