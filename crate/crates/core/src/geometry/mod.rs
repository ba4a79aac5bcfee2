//! State spaces, polygonal worlds, robots and collision checking.

mod polygon;
mod problem;
mod space;
mod world;

use thiserror::Error;

pub use polygon::{orient, point_segment_distance, segments_intersect, Point, Polygon};
pub use problem::{Objective, ProblemBuilder, ProblemDef};
pub use space::{angle_diff, normalize_angle, Rect, SpaceKind, State, StateSpace, DEFAULT_ROTATION_WEIGHT};
pub use world::{bundled_world_text, Robot, World, BUNDLED_WORLDS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("bounds must have positive width and height: {0:?}")]
    DegenerateBounds(Rect),
    #[error("rotation weight must be a nonnegative finite number, got {0}")]
    InvalidRotationWeight(f64),
    #[error("state {state:?} is not valid for a {kind} space")]
    StateMismatch { kind: SpaceKind, state: State },
    #[error("interpolation parameter {0} outside [0, 1]")]
    InterpolationParameter(f64),
    #[error("unknown state space {0:?} (expected R2, SE2 or CAR1)")]
    UnknownSpace(String),
    #[error("unknown objective {0:?} (expected none, length, clearance or work)")]
    UnknownObjective(String),
    #[error("unknown bundled world {0:?}")]
    UnknownWorld(String),
    #[error("obstacle {index}: {reason}")]
    BadObstacle { index: usize, reason: &'static str },
    #[error("world file line {line}: {message}")]
    WorldSyntax { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("robot description: {0}")]
    RobotSyntax(String),
    #[error("robot polygon must be convex")]
    ConcaveRobot,
    #[error("{0} state {1:?} outside bounds")]
    OutOfBounds(&'static str, State),
    #[error("{0}")]
    InvalidParameter(String),
}
