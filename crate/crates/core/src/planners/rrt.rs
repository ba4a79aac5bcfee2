use std::sync::Arc;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::nn::nearest_index;
use super::params::{ParamDecl, ParamKind, ParamValue, Params};
use super::progress::{memory_estimate, Snapshot};
use super::{
    base_properties, check_endpoints, finish_at_goal, trivial_result, unsolved_result, Planner, PlannerError,
    PlannerResult, ProgressSink, Publisher, SolveStatus, TerminationCondition, Tree,
};
use crate::geometry::ProblemDef;

pub(crate) const RANGE: ParamDecl = ParamDecl {
    name: "range",
    kind: ParamKind::PositiveReal,
};
pub(crate) const GOAL_BIAS: ParamDecl = ParamDecl {
    name: "goal_bias",
    kind: ParamKind::Real { min: 0.0, max: 1.0 },
};

pub(crate) fn default_range(problem: &ProblemDef) -> ParamValue {
    ParamValue::Real(0.1 * problem.space.bounds.diagonal())
}

pub(crate) const DEFAULT_GOAL_BIAS: f64 = 0.05;

pub(crate) struct Rrt {
    problem: Arc<ProblemDef>,
    params: Params,
    publisher: Publisher,
}

impl Rrt {
    pub fn new(problem: Arc<ProblemDef>, given: &IndexMap<String, String>) -> Result<Self, PlannerError> {
        let params = Params::resolve(
            "RRT",
            &[RANGE, GOAL_BIAS],
            &[
                ("range", default_range(&problem)),
                ("goal_bias", ParamValue::Real(DEFAULT_GOAL_BIAS)),
            ],
            given,
        )?;
        Ok(Rrt {
            problem,
            params,
            publisher: Publisher::default(),
        })
    }
}

impl Planner for Rrt {
    fn planner_type(&self) -> &str {
        "RRT"
    }

    fn settings(&self) -> IndexMap<String, String> {
        self.params.settings()
    }

    fn register_progress_sink(&mut self, sink: ProgressSink) {
        self.publisher.set(sink);
    }

    fn solve(&mut self, tc: &TerminationCondition, seed: u64) -> Result<PlannerResult, PlannerError> {
        let problem = &*self.problem;
        check_endpoints(problem)?;
        if problem.in_goal(&problem.start) {
            return Ok(trivial_result(problem));
        }
        let space = &problem.space;
        let range = self.params.real("range");
        let goal_bias = self.params.real("goal_bias");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tree = Tree::with_root(problem.start);
        let mut closest = (0usize, space.distance(&problem.start, &problem.goal));
        let mut iterations = 0u64;

        while !tc.should_stop() {
            iterations += 1;
            let target = if rng.random::<f64>() < goal_bias {
                problem.goal
            } else {
                space.sample_uniform(&mut rng)
            };
            let near = nearest_index(&tree.states, &target, space).expect("tree nonempty");
            let new = space.steer(&tree.states[near], &target, range);
            if problem.check_motion(&tree.states[near], &new) {
                let id = tree.add(new, near);
                let gap = space.distance(&new, &problem.goal);
                if gap < closest.1 {
                    closest = (id, gap);
                }
                if gap <= problem.goal_tolerance {
                    let path = finish_at_goal(problem, tree.path_to(id));
                    let cost = crate::paths::path_length(&path, space);
                    self.publisher.publish(Snapshot {
                        best_cost: None,
                        iterations,
                        graph_states: tree.len() as u64,
                        edges: tree.len() as u64 - 1,
                    });
                    return Ok(PlannerResult {
                        status: SolveStatus::ExactSolution,
                        path: Some(path),
                        solution_difference: Some(0.0),
                        best_cost: Some(cost),
                        run_properties: base_properties(tree.len(), iterations),
                        memory_estimate: memory_estimate(tree.len() as u64, tree.len() as u64 - 1),
                    });
                }
            }
            self.publisher.publish(Snapshot {
                best_cost: None,
                iterations,
                graph_states: tree.len() as u64,
                edges: tree.len() as u64 - 1,
            });
        }
        let n = tree.len() as u64;
        Ok(unsolved_result(
            problem,
            Some((tree.path_to(closest.0), closest.1)),
            base_properties(tree.len(), iterations),
            memory_estimate(n, n - 1),
        ))
    }
}
