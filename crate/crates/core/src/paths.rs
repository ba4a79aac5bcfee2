//! Path objectives and the default simplification pipeline
//! (random short-cutting followed by midpoint smoothing).

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{ProblemDef, SpaceKind, State, StateSpace};
use crate::par::{self, Exec};

/// Offset in the reciprocal-clearance state cost `1 / (clearance + delta)`.
pub const WORK_CLEARANCE_OFFSET: f64 = 1e-3;
/// Weight of the path-length term in mechanical work.
pub const WORK_LENGTH_WEIGHT: f64 = 1e-4;

pub const SHORTCUT_ATTEMPTS_PER_STATE: usize = 4;
pub const SMOOTHING_ROUNDS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("path file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("a path needs at least one state")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub states: Vec<State>,
}

impl Path {
    pub fn new(states: Vec<State>) -> Result<Self, PathError> {
        if states.is_empty() {
            return Err(PathError::Empty);
        }
        Ok(Path { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        &self.states[self.states.len() - 1]
    }

    pub fn length(&self, space: &StateSpace) -> f64 {
        path_length(&self.states, space)
    }

    /// Every consecutive pair passes the motion validator.
    pub fn is_valid(&self, problem: &ProblemDef) -> bool {
        self.states.iter().all(|s| problem.is_state_valid(s))
            && self.states.windows(2).all(|w| problem.check_motion(&w[0], &w[1]))
    }

    /// States spaced at most `spacing` apart (by space distance), original
    /// vertices included.
    pub fn densify(&self, space: &StateSpace, spacing: f64) -> Vec<State> {
        let mut out = Vec::with_capacity(self.states.len());
        out.push(self.states[0]);
        for w in self.states.windows(2) {
            let d = space.distance(&w[0], &w[1]);
            let n = (d / spacing).ceil().max(1.0) as usize;
            for i in 1..=n {
                out.push(space.lerp(&w[0], &w[1], i as f64 / n as f64));
            }
        }
        out
    }
}

pub fn path_length(states: &[State], space: &StateSpace) -> f64 {
    states.windows(2).map(|w| space.distance(&w[0], &w[1])).sum()
}

/// Minimum clearance over states sampled at `collision_resolution` spacing.
pub fn path_clearance(p: &Path, problem: &ProblemDef) -> f64 {
    path_clearance_with(p, problem, Exec::default())
}

pub fn path_clearance_with(p: &Path, problem: &ProblemDef, exec: Exec) -> f64 {
    let samples = p.densify(&problem.space, problem.collision_resolution);
    par::map(exec, &samples, |s| problem.clearance(s))
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// State cost used by the mechanical-work objective.
pub fn work_state_cost(problem: &ProblemDef, s: &State) -> f64 {
    1.0 / (problem.clearance(s) + WORK_CLEARANCE_OFFSET)
}

/// Sum of positive state-cost increments plus a small length term.
pub fn mechanical_work(p: &Path, problem: &ProblemDef) -> f64 {
    let costs: Vec<f64> = problem
        .clearances(&p.states, Exec::default())
        .into_iter()
        .map(|c| 1.0 / (c + WORK_CLEARANCE_OFFSET))
        .collect();
    let climb: f64 = costs.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum();
    climb + WORK_LENGTH_WEIGHT * p.length(&problem.space)
}

fn point_along(states: &[State], cum: &[f64], space: &StateSpace, s: f64) -> (usize, f64, State) {
    // segment i spans cum[i]..cum[i+1]
    let i = match cum.binary_search_by(|c| c.total_cmp(&s)) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    }
    .min(states.len() - 2);
    let seg = cum[i + 1] - cum[i];
    let t = if seg > 0.0 {
        ((s - cum[i]) / seg).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (i, t, space.lerp(&states[i], &states[i + 1], t))
}

/// Random short-cutting: pick two points on the path (anywhere along its
/// segments) and splice in the direct motion when it is valid and shorter.
pub fn shortcut<R: Rng + ?Sized>(p: &Path, problem: &ProblemDef, attempts: usize, rng: &mut R) -> Path {
    let space = &problem.space;
    let mut states = p.states.clone();
    for _ in 0..attempts {
        if states.len() < 3 {
            break;
        }
        let mut cum = Vec::with_capacity(states.len());
        cum.push(0.0);
        for w in states.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + space.distance(&w[0], &w[1]));
        }
        let total = *cum.last().unwrap();
        if total <= 0.0 {
            break;
        }
        let mut s1 = rng.random::<f64>() * total;
        let mut s2 = rng.random::<f64>() * total;
        if s1 > s2 {
            std::mem::swap(&mut s1, &mut s2);
        }
        let (i, _, p1) = point_along(&states, &cum, space, s1);
        let (j, _, p2) = point_along(&states, &cum, space, s2);
        if j <= i {
            continue;
        }
        if !problem.check_motion(&p1, &p2) {
            continue;
        }
        let mut next = Vec::with_capacity(states.len());
        next.extend_from_slice(&states[..=i]);
        next.push(p1);
        next.push(p2);
        next.extend_from_slice(&states[j + 1..]);
        next.dedup_by(|a, b| a.bit_eq(b));
        if path_length(&next, space) <= total && next.windows(2).all(|w| problem.check_motion(&w[0], &w[1])) {
            states = next;
        }
    }
    Path { states }
}

/// Midpoint smoothing: move each interior vertex to the midpoint of its
/// neighbors when both new motions are valid.
pub fn smooth(p: &Path, problem: &ProblemDef, rounds: usize) -> Path {
    let space = &problem.space;
    let mut states = p.states.clone();
    for _ in 0..rounds {
        for i in 1..states.len().saturating_sub(1) {
            let (prev, cur, next) = (states[i - 1], states[i], states[i + 1]);
            let mid = space.lerp(&prev, &next, 0.5);
            let old = space.distance(&prev, &cur) + space.distance(&cur, &next);
            let new = space.distance(&prev, &mid) + space.distance(&mid, &next);
            if new <= old && problem.check_motion(&prev, &mid) && problem.check_motion(&mid, &next) {
                states[i] = mid;
            }
        }
    }
    Path { states }
}

/// Default simplification. Returns the simplified path and the seconds spent.
pub fn simplify<R: Rng + ?Sized>(p: &Path, problem: &ProblemDef, rng: &mut R) -> (Path, f64) {
    let started = Instant::now();
    let cut = shortcut(p, problem, SHORTCUT_ATTEMPTS_PER_STATE * p.len(), rng);
    let smoothed = smooth(&cut, problem, SMOOTHING_ROUNDS);
    (smoothed, started.elapsed().as_secs_f64())
}

/// One state per line: `x y` for R2, `x y theta` otherwise.
pub fn path_to_text(states: &[State], kind: SpaceKind) -> String {
    let mut out = String::new();
    for s in states {
        if kind.has_rotation() {
            let _ = writeln!(out, "{} {} {}", s.x, s.y, s.theta);
        } else {
            let _ = writeln!(out, "{} {}", s.x, s.y);
        }
    }
    out
}

pub fn parse_path_text(text: &str) -> Result<Vec<State>, PathError> {
    let mut states = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| PathError::Syntax {
                line: i + 1,
                message: "non-numeric value".into(),
            })?;
        match nums.as_slice() {
            [x, y] => states.push(State::point(*x, *y)),
            [x, y, t] => states.push(State::new(*x, *y, *t)),
            _ => {
                return Err(PathError::Syntax {
                    line: i + 1,
                    message: "expected `x y` or `x y theta`".into(),
                })
            }
        }
    }
    Ok(states)
}
