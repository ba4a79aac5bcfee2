use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::polygon::{Point, Polygon};
use super::space::{State, StateSpace};
use super::world::{Robot, World};
use super::GeometryError;
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    None,
    Length,
    Clearance,
    Work,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::None => "none",
            Objective::Length => "length",
            Objective::Clearance => "clearance",
            Objective::Work => "work",
        })
    }
}

impl FromStr for Objective {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Objective::None),
            "length" | "path_length" => Ok(Objective::Length),
            "clearance" | "max_min_clearance" => Ok(Objective::Clearance),
            "work" | "mechanical_work" => Ok(Objective::Work),
            _ => Err(GeometryError::UnknownObjective(s.to_string())),
        }
    }
}

/// A complete planning problem. Immutable once built; share it behind an `Arc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDef {
    pub name: String,
    pub space: StateSpace,
    pub world: World,
    pub robot: Robot,
    pub start: State,
    pub goal: State,
    pub goal_tolerance: f64,
    pub objective: Objective,
    pub objective_threshold: f64,
    pub collision_resolution: f64,
}

/// Builder with the documented defaults (goal tolerance 5% and collision
/// resolution 1% of the bounds diagonal).
#[derive(Debug, Clone)]
pub struct ProblemBuilder {
    name: String,
    space: StateSpace,
    world: World,
    robot: Robot,
    start: State,
    goal: State,
    goal_tolerance: Option<f64>,
    objective: Objective,
    objective_threshold: f64,
    collision_resolution: Option<f64>,
}

impl ProblemBuilder {
    pub fn goal_tolerance(mut self, v: f64) -> Self {
        self.goal_tolerance = Some(v);
        self
    }

    pub fn collision_resolution(mut self, v: f64) -> Self {
        self.collision_resolution = Some(v);
        self
    }

    pub fn robot(mut self, r: Robot) -> Self {
        self.robot = r;
        self
    }

    pub fn objective(mut self, o: Objective, threshold: f64) -> Self {
        self.objective = o;
        self.objective_threshold = threshold;
        self
    }

    pub fn name(mut self, n: impl Into<String>) -> Self {
        self.name = n.into();
        self
    }

    pub fn build(self) -> Result<ProblemDef, GeometryError> {
        let diag = self.space.bounds.diagonal();
        let p = ProblemDef {
            name: self.name,
            space: self.space,
            world: self.world,
            robot: self.robot,
            start: self.start,
            goal: self.goal,
            goal_tolerance: self.goal_tolerance.unwrap_or(0.05 * diag),
            objective: self.objective,
            objective_threshold: self.objective_threshold,
            collision_resolution: self.collision_resolution.unwrap_or(0.01 * diag),
        };
        p.validate()?;
        Ok(p)
    }
}

impl ProblemDef {
    /// Starts a builder. The space bounds are taken from the world.
    pub fn builder(
        name: impl Into<String>,
        space: StateSpace,
        world: World,
        start: State,
        goal: State,
    ) -> ProblemBuilder {
        let space = StateSpace {
            bounds: world.bounds,
            ..space
        };
        ProblemBuilder {
            name: name.into(),
            space,
            world,
            robot: Robot::Point,
            start: space.state(start.x, start.y, start.theta),
            goal: space.state(goal.x, goal.y, goal.theta),
            goal_tolerance: None,
            objective: Objective::Length,
            objective_threshold: f64::INFINITY,
            collision_resolution: None,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.goal_tolerance > 0.0) {
            return Err(GeometryError::InvalidParameter(
                "goal_tolerance must be positive".into(),
            ));
        }
        if !(self.collision_resolution > 0.0 && self.collision_resolution.is_finite()) {
            return Err(GeometryError::InvalidParameter(
                "collision_resolution must be positive".into(),
            ));
        }
        if !(self.objective_threshold >= 0.0) {
            return Err(GeometryError::InvalidParameter(
                "objective_threshold must be nonnegative".into(),
            ));
        }
        self.space.check_state(&self.start)?;
        self.space.check_state(&self.goal)?;
        if !self.space.in_bounds(&self.start) {
            return Err(GeometryError::OutOfBounds("start", self.start));
        }
        if !self.space.in_bounds(&self.goal) {
            return Err(GeometryError::OutOfBounds("goal", self.goal));
        }
        Ok(())
    }

    fn placed_robot(&self, s: &State) -> Option<Polygon> {
        match &self.robot {
            Robot::Point => None,
            Robot::Convex(p) => Some(p.transformed(s.x, s.y, s.theta)),
        }
    }

    /// In bounds and not touching any obstacle.
    pub fn is_state_valid(&self, s: &State) -> bool {
        let b = &self.world.bounds;
        match self.placed_robot(s) {
            None => {
                if !b.contains(s.x, s.y) {
                    return false;
                }
                let p = Point::new(s.x, s.y);
                !self.world.obstacles.iter().any(|o| o.contains(p))
            }
            Some(body) => {
                if body.vertices().iter().any(|v| !b.contains(v.x, v.y)) {
                    return false;
                }
                !self.world.obstacles.iter().any(|o| o.intersects(&body))
            }
        }
    }

    /// Discrete motion check at `collision_resolution` spacing, endpoints
    /// included. Symmetric in its arguments.
    pub fn check_motion(&self, a: &State, b: &State) -> bool {
        // fixed traversal order so that (a, b) and (b, a) test identical states
        let (a, b) = if (a.x, a.y, a.theta) <= (b.x, b.y, b.theta) {
            (a, b)
        } else {
            (b, a)
        };
        let d = self.space.distance(a, b);
        let steps = (d / self.collision_resolution).ceil().max(1.0) as usize;
        if !self.is_state_valid(a) || !self.is_state_valid(b) {
            return false;
        }
        (1..steps).all(|i| {
            let s = self.space.lerp(a, b, i as f64 / steps as f64);
            self.is_state_valid(&s)
        })
    }

    /// Distance from the robot at `s` to the nearest obstacle; infinite in
    /// an obstacle-free world, zero on contact.
    pub fn clearance(&self, s: &State) -> f64 {
        match self.placed_robot(s) {
            None => {
                let p = Point::new(s.x, s.y);
                self.world
                    .obstacles
                    .iter()
                    .map(|o| o.distance_to_point(p))
                    .fold(f64::INFINITY, f64::min)
            }
            Some(body) => self
                .world
                .obstacles
                .iter()
                .map(|o| o.distance_to_polygon(&body))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn clearances(&self, states: &[State], exec: Exec) -> Vec<f64> {
        par::map(exec, states, |s| self.clearance(s))
    }

    pub fn validity(&self, states: &[State], exec: Exec) -> Vec<bool> {
        par::map(exec, states, |s| self.is_state_valid(s))
    }

    pub fn in_goal(&self, s: &State) -> bool {
        self.space.distance(s, &self.goal) <= self.goal_tolerance
    }
}

#[cfg(test)]
mod tests {
    use super::super::space::{Rect, SpaceKind};
    use super::*;

    fn corridor(space: SpaceKind) -> ProblemDef {
        let world = World::bundled("corridor").unwrap();
        ProblemDef::builder(
            "corridor",
            StateSpace::new(space, world.bounds),
            world,
            State::point(1.0, 1.5),
            State::point(1.0, 14.5),
        )
        .build()
        .unwrap()
    }

    fn empty() -> ProblemDef {
        let world = World::empty(Rect::new(0.0, 0.0, 10.0, 10.0).unwrap());
        ProblemDef::builder(
            "empty",
            StateSpace::new(SpaceKind::R2, world.bounds),
            world,
            State::point(1.0, 1.0),
            State::point(9.0, 9.0),
        )
        .build()
        .unwrap()
    }

    #[test]
    fn defaults_follow_diagonal() {
        let p = empty();
        let diag = 200f64.sqrt();
        assert!((p.goal_tolerance - 0.05 * diag).abs() < 1e-15);
        assert!((p.collision_resolution - 0.01 * diag).abs() < 1e-15);
    }

    #[test]
    fn point_validity() {
        let p = corridor(SpaceKind::R2);
        assert!(!p.is_state_valid(&State::point(5.0, 4.0)));
        // on the wall edge y = 5
        assert!(!p.is_state_valid(&State::point(5.0, 5.0)));
        assert!(p.is_state_valid(&State::point(5.0, 6.0)));
        assert!(!p.is_state_valid(&State::point(-0.1, 6.0)));
        let e = empty();
        assert!(e.is_state_valid(&State::point(0.0, 10.0)));
    }

    #[test]
    fn clearance_cases() {
        let p = corridor(SpaceKind::R2);
        assert_eq!(p.clearance(&State::point(10.0, 6.0)), 1.0);
        assert!((p.clearance(&State::point(10.0, 5.25)) - 0.25).abs() < 1e-12);
        assert_eq!(empty().clearance(&State::point(3.0, 3.0)), f64::INFINITY);
    }

    #[test]
    fn motion_through_wall_rejected() {
        let p = corridor(SpaceKind::R2);
        assert!(!p.check_motion(&State::point(5.0, 2.0), &State::point(5.0, 6.0)));
        assert!(p.check_motion(&State::point(1.0, 6.0), &State::point(19.0, 6.0)));
        let s = State::point(3.0, 1.0);
        assert!(p.check_motion(&s, &s));
    }

    #[test]
    fn box_robot_in_se2() {
        let world = World::bundled("corridor").unwrap();
        let p = ProblemDef::builder(
            "c",
            StateSpace::new(SpaceKind::SE2, world.bounds),
            world,
            State::new(2.0, 1.5, 0.0),
            State::new(2.0, 14.5, 0.0),
        )
        .robot(Robot::parse("box 2.5 2.5").unwrap())
        .build()
        .unwrap();
        assert!(p.is_state_valid(&p.start));
        // 2.5 m box cannot sit in a 2 m passage
        assert!(!p.is_state_valid(&State::new(10.0, 6.0, 0.0)));
        let c = p.clearance(&State::new(5.0, 1.5, 0.0));
        assert!((c - 0.25).abs() < 1e-12, "{c}");
    }

    #[test]
    fn problem_validation() {
        let world = World::empty(Rect::new(0.0, 0.0, 1.0, 1.0).unwrap());
        let space = StateSpace::new(SpaceKind::R2, world.bounds);
        let r = ProblemDef::builder(
            "x",
            space,
            world.clone(),
            State::point(2.0, 0.5),
            State::point(0.5, 0.5),
        )
        .build();
        assert!(matches!(r, Err(GeometryError::OutOfBounds("start", _))));
        let r = ProblemDef::builder("x", space, world, State::point(0.5, 0.5), State::point(0.5, 0.6))
            .goal_tolerance(0.0)
            .build();
        assert!(r.is_err());
    }
}
