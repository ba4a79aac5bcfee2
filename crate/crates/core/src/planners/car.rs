use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::State;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Car1Control {
    /// m/s, negative for reversing.
    pub speed: f64,
    /// Steering angle in radians.
    pub steering: f64,
    /// Seconds.
    pub duration: f64,
}

/// Control bounds and wheelbase of the first-order car.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarModel {
    pub wheelbase: f64,
    pub min_speed: f64,
    pub max_speed: f64,
    pub max_steering: f64,
    pub min_duration: f64,
    pub max_duration: f64,
}

impl Default for CarModel {
    fn default() -> Self {
        CarModel {
            wheelbase: 1.0,
            min_speed: -1.0,
            max_speed: 1.0,
            max_steering: 0.5,
            min_duration: 0.1,
            max_duration: 1.0,
        }
    }
}

impl CarModel {
    pub fn sample_control<R: Rng + ?Sized>(&self, rng: &mut R) -> Car1Control {
        let lerp = |lo: f64, hi: f64, u: f64| lo + (hi - lo) * u;
        Car1Control {
            speed: lerp(self.min_speed, self.max_speed, rng.random()),
            steering: lerp(-self.max_steering, self.max_steering, rng.random()),
            duration: lerp(self.min_duration, self.max_duration, rng.random()),
        }
    }
}

fn substeps(duration: f64, step: f64) -> (usize, f64) {
    let n = (duration / step).ceil().max(1.0) as usize;
    (n, duration / n as f64)
}

#[inline]
fn euler(s: &State, speed: f64, turn_rate: f64, dt: f64) -> State {
    State::new(
        s.x + speed * s.theta.cos() * dt,
        s.y + speed * s.theta.sin() * dt,
        s.theta + turn_rate * dt,
    )
}

/// Forward-Euler integration of the car kinematics over `u.duration`, in
/// equal sub-steps no longer than `step`.
pub fn propagate_car(s: &State, u: &Car1Control, step: f64, wheelbase: f64) -> State {
    assert!(step > 0.0, "propagation step must be positive");
    if u.speed == 0.0 {
        return *s;
    }
    let (n, dt) = substeps(u.duration, step);
    let turn_rate = u.speed / wheelbase * u.steering.tan();
    let mut cur = *s;
    for _ in 0..n {
        cur = euler(&cur, u.speed, turn_rate, dt);
    }
    cur
}

/// Like [`propagate_car`] but returns every intermediate state, excluding
/// `s` and ending with the final state.
pub fn propagate_car_trajectory(s: &State, u: &Car1Control, step: f64, wheelbase: f64) -> Vec<State> {
    assert!(step > 0.0, "propagation step must be positive");
    let (n, dt) = substeps(u.duration, step);
    let turn_rate = u.speed / wheelbase * u.steering.tan();
    let mut out = Vec::with_capacity(n);
    let mut cur = *s;
    for _ in 0..n {
        cur = euler(&cur, u.speed, turn_rate, dt);
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::angle_diff;
    use std::f64::consts::PI;

    #[test]
    fn straight_line() {
        let u = Car1Control {
            speed: 1.0,
            steering: 0.0,
            duration: 2.0,
        };
        let s = propagate_car(&State::new(0.0, 0.0, 0.0), &u, 0.05, 1.0);
        assert!((s.x - 2.0).abs() < 1e-12 && s.y.abs() < 1e-12 && s.theta == 0.0);
    }

    #[test]
    fn zero_speed_is_identity() {
        let s0 = State::new(1.0, 2.0, 0.3);
        let u = Car1Control {
            speed: 0.0,
            steering: 0.4,
            duration: 5.0,
        };
        assert!(propagate_car(&s0, &u, 0.1, 1.0).bit_eq(&s0));
    }

    #[test]
    fn full_circle_returns_heading_and_position() {
        let phi: f64 = 0.4;
        let radius = 1.0 / phi.tan();
        let u = Car1Control {
            speed: 1.0,
            steering: phi,
            duration: 2.0 * PI * radius,
        };
        let s0 = State::new(3.0, 3.0, 0.7);
        let s = propagate_car(&s0, &u, 1e-3, 1.0);
        assert!(angle_diff(s.theta, s0.theta).abs() < 1e-2);
        // position drift of forward Euler over one loop is O(step)
        assert!(((s.x - s0.x).powi(2) + (s.y - s0.y).powi(2)).sqrt() < 1e-2);
        let half = Car1Control {
            duration: PI * radius,
            ..u
        };
        let h = propagate_car(&s0, &half, 1e-3, 1.0);
        let diameter = ((h.x - s0.x).powi(2) + (h.y - s0.y).powi(2)).sqrt();
        assert!((diameter - 2.0 * radius).abs() < 1e-2);
    }

    #[test]
    fn trajectory_ends_at_propagated_state() {
        let u = Car1Control {
            speed: -0.7,
            steering: -0.3,
            duration: 0.93,
        };
        let s0 = State::new(1.0, 1.0, -2.0);
        let traj = propagate_car_trajectory(&s0, &u, 0.05, 1.5);
        assert_eq!(traj.len(), 19);
        assert!(traj.last().unwrap().bit_eq(&propagate_car(&s0, &u, 0.05, 1.5)));
    }
}
