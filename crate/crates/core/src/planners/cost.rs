use crate::geometry::{Objective, ProblemDef, State};
use crate::paths::WORK_LENGTH_WEIGHT;

/// Motion cost under the problem's objective.
///
/// Length (and `none`) sums distances. Work sums positive increments of the
/// reciprocal-clearance state cost plus a small length term. Clearance is a
/// bottleneck cost: the largest reciprocal clearance along the path, so
/// minimizing it maximizes the minimum clearance.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CostModel {
    objective: Objective,
}

impl CostModel {
    pub fn new(objective: Objective) -> Self {
        CostModel { objective }
    }

    pub fn needs_state_cost(&self) -> bool {
        matches!(self.objective, Objective::Work | Objective::Clearance)
    }

    pub fn state_cost(&self, problem: &ProblemDef, s: &State) -> f64 {
        if self.needs_state_cost() {
            crate::paths::work_state_cost(problem, s)
        } else {
            0.0
        }
    }

    #[inline]
    pub fn motion(&self, problem: &ProblemDef, a: &State, ca: f64, b: &State, cb: f64) -> f64 {
        match self.objective {
            Objective::None | Objective::Length => problem.space.distance(a, b),
            Objective::Work => (cb - ca).max(0.0) + WORK_LENGTH_WEIGHT * problem.space.distance(a, b),
            Objective::Clearance => ca.max(cb),
        }
    }

    #[inline]
    pub fn combine(&self, acc: f64, motion: f64) -> f64 {
        match self.objective {
            Objective::Clearance => acc.max(motion),
            _ => acc + motion,
        }
    }

    pub fn identity(&self) -> f64 {
        0.0
    }
}
