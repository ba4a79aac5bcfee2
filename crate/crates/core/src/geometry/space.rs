use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Signed shortest angular difference `to - from`, in `(-pi, pi]`.
pub fn angle_diff(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    R2,
    SE2,
    /// First-order car: SE(2) configuration with control-driven motion.
    Car1,
}

impl SpaceKind {
    pub fn dimension(self) -> usize {
        match self {
            SpaceKind::R2 => 2,
            SpaceKind::SE2 | SpaceKind::Car1 => 3,
        }
    }

    pub fn has_rotation(self) -> bool {
        !matches!(self, SpaceKind::R2)
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::R2 => "R2",
            SpaceKind::SE2 => "SE2",
            SpaceKind::Car1 => "CAR1",
        })
    }
}

impl FromStr for SpaceKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "R2" => Ok(SpaceKind::R2),
            "SE2" => Ok(SpaceKind::SE2),
            "CAR1" | "CAR" => Ok(SpaceKind::Car1),
            _ => Err(GeometryError::UnknownSpace(s.to_string())),
        }
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self, GeometryError> {
        let r = Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        if !(r.width() > 0.0 && r.height() > 0.0) || ![min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::DegenerateBounds(r));
        }
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.min_x + self.max_x), 0.5 * (self.min_y + self.max_y))
    }

    /// Closed containment test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

/// A configuration. `theta` is always normalized to `(-pi, pi]` and is zero
/// for R2 states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl State {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        State {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn point(x: f64, y: f64) -> Self {
        State { x, y, theta: 0.0 }
    }

    /// Bitwise equality, used by determinism checks.
    pub fn bit_eq(&self, other: &State) -> bool {
        self.x.to_bits() == other.x.to_bits()
            && self.y.to_bits() == other.y.to_bits()
            && self.theta.to_bits() == other.theta.to_bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    pub kind: SpaceKind,
    pub bounds: Rect,
    pub rotation_weight: f64,
}

pub const DEFAULT_ROTATION_WEIGHT: f64 = 0.5;

impl StateSpace {
    pub fn new(kind: SpaceKind, bounds: Rect) -> Self {
        StateSpace {
            kind,
            bounds,
            rotation_weight: DEFAULT_ROTATION_WEIGHT,
        }
    }

    pub fn with_rotation_weight(mut self, w: f64) -> Result<Self, GeometryError> {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(GeometryError::InvalidRotationWeight(w));
        }
        self.rotation_weight = w;
        Ok(self)
    }

    /// Checks that `s` is well-formed for this space (finite coordinates,
    /// normalized heading, zero heading for R2).
    pub fn check_state(&self, s: &State) -> Result<(), GeometryError> {
        if !(s.x.is_finite() && s.y.is_finite() && s.theta.is_finite()) {
            return Err(GeometryError::StateMismatch {
                kind: self.kind,
                state: *s,
            });
        }
        let theta_ok = if self.kind.has_rotation() {
            s.theta > -PI && s.theta <= PI
        } else {
            s.theta == 0.0
        };
        if !theta_ok {
            return Err(GeometryError::StateMismatch {
                kind: self.kind,
                state: *s,
            });
        }
        Ok(())
    }

    /// Builds a state for this space, dropping the heading for R2.
    pub fn state(&self, x: f64, y: f64, theta: f64) -> State {
        if self.kind.has_rotation() {
            State::new(x, y, theta)
        } else {
            State::point(x, y)
        }
    }

    /// Translational distance plus weighted wrapped heading difference.
    /// Both states are assumed valid for this space.
    #[inline]
    pub fn distance(&self, a: &State, b: &State) -> f64 {
        let d = (a.x - b.x).hypot(a.y - b.y);
        if self.kind.has_rotation() {
            d + self.rotation_weight * angle_diff(a.theta, b.theta).abs()
        } else {
            d
        }
    }

    pub fn checked_distance(&self, a: &State, b: &State) -> Result<f64, GeometryError> {
        self.check_state(a)?;
        self.check_state(b)?;
        Ok(self.distance(a, b))
    }

    pub fn interpolate(&self, a: &State, b: &State, t: f64) -> Result<State, GeometryError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::InterpolationParameter(t));
        }
        Ok(self.lerp(a, b, t))
    }

    /// Unchecked interpolation; `t` must lie in `[0, 1]`.
    #[inline]
    pub(crate) fn lerp(&self, a: &State, b: &State, t: f64) -> State {
        if t == 0.0 {
            return *a;
        }
        if t == 1.0 {
            return *b;
        }
        let x = a.x + (b.x - a.x) * t;
        let y = a.y + (b.y - a.y) * t;
        if self.kind.has_rotation() {
            State {
                x,
                y,
                theta: normalize_angle(a.theta + angle_diff(a.theta, b.theta) * t),
            }
        } else {
            State::point(x, y)
        }
    }

    /// Uniform over the bounds and, for rotational spaces, over `(-pi, pi]`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let b = &self.bounds;
        let x = b.min_x + rng.random::<f64>() * b.width();
        let y = b.min_y + rng.random::<f64>() * b.height();
        if self.kind.has_rotation() {
            let u: f64 = rng.random();
            State {
                x,
                y,
                theta: PI - 2.0 * PI * u,
            }
        } else {
            State::point(x, y)
        }
    }

    /// Moves from `from` toward `to` by at most `max_step` (in space distance).
    pub fn steer(&self, from: &State, to: &State, max_step: f64) -> State {
        let d = self.distance(from, to);
        if d <= max_step {
            *to
        } else {
            self.lerp(from, to, max_step / d)
        }
    }

    pub fn in_bounds(&self, s: &State) -> bool {
        self.bounds.contains(s.x, s.y)
    }
}
