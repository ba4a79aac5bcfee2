use std::sync::Arc;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::nn::nearest_index;
use super::params::Params;
use super::progress::{memory_estimate, Snapshot};
use super::rrt::{default_range, RANGE};
use super::{
    base_properties, check_endpoints, trivial_result, unsolved_result, Planner, PlannerError, PlannerResult,
    ProgressSink, Publisher, SolveStatus, TerminationCondition, Tree,
};
use crate::geometry::{ProblemDef, State};
use crate::props::{TypeTag, Value};

/// Bidirectional RRT: one tree from the start, one from the goal; each
/// extension of one tree is followed by a greedy connect attempt from the
/// other.
pub(crate) struct RrtConnect {
    problem: Arc<ProblemDef>,
    params: Params,
    publisher: Publisher,
}

enum Grow {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

impl RrtConnect {
    pub fn new(problem: Arc<ProblemDef>, given: &IndexMap<String, String>) -> Result<Self, PlannerError> {
        let params = Params::resolve("RRTCONNECT", &[RANGE], &[("range", default_range(&problem))], given)?;
        Ok(RrtConnect {
            problem,
            params,
            publisher: Publisher::default(),
        })
    }

    fn grow(&self, tree: &mut Tree, target: &State, range: f64) -> Grow {
        let space = &self.problem.space;
        let near = nearest_index(&tree.states, target, space).expect("tree nonempty");
        let from = tree.states[near];
        let new = space.steer(&from, target, range);
        if !self.problem.check_motion(&from, &new) {
            return Grow::Trapped;
        }
        let id = tree.add(new, near);
        if new.bit_eq(target) {
            Grow::Reached(id)
        } else {
            Grow::Advanced(id)
        }
    }
}

impl Planner for RrtConnect {
    fn planner_type(&self) -> &str {
        "RRTCONNECT"
    }

    fn settings(&self) -> IndexMap<String, String> {
        self.params.settings()
    }

    fn extra_properties(&self) -> Vec<(String, TypeTag)> {
        vec![
            ("start_tree_states".into(), TypeTag::Integer),
            ("goal_tree_states".into(), TypeTag::Integer),
        ]
    }

    fn register_progress_sink(&mut self, sink: ProgressSink) {
        self.publisher.set(sink);
    }

    fn solve(&mut self, tc: &TerminationCondition, seed: u64) -> Result<PlannerResult, PlannerError> {
        let problem = self.problem.clone();
        check_endpoints(&problem)?;
        if problem.in_goal(&problem.start) {
            let mut r = trivial_result(&problem);
            r.run_properties.insert("start_tree_states".into(), Value::Integer(1));
            r.run_properties.insert("goal_tree_states".into(), Value::Integer(0));
            return Ok(r);
        }
        let space = &problem.space;
        let range = self.params.real("range");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // trees[0] grows from the start
        let mut trees = [Tree::with_root(problem.start), Tree::with_root(problem.goal)];
        let mut closest = (0usize, space.distance(&problem.start, &problem.goal));
        let mut iterations = 0u64;
        let mut active = 0usize;

        let props = |trees: &[Tree; 2], iterations: u64| {
            let mut p = base_properties(trees[0].len() + trees[1].len(), iterations);
            p.insert("start_tree_states".into(), Value::Integer(trees[0].len() as i64));
            p.insert("goal_tree_states".into(), Value::Integer(trees[1].len() as i64));
            p
        };
        let memory = |trees: &[Tree; 2]| {
            let n = (trees[0].len() + trees[1].len()) as u64;
            memory_estimate(n, n - 2)
        };

        while !tc.should_stop() {
            iterations += 1;
            let target = space.sample_uniform(&mut rng);
            let grown = self.grow(&mut trees[active], &target, range);
            let new_id = match grown {
                Grow::Trapped => None,
                Grow::Advanced(id) | Grow::Reached(id) => Some(id),
            };
            if let Some(new_id) = new_id {
                if active == 0 {
                    let gap = space.distance(&trees[0].states[new_id], &problem.goal);
                    if gap < closest.1 {
                        closest = (new_id, gap);
                    }
                }
                let anchor = trees[active].states[new_id];
                let other = 1 - active;
                // greedy connect from the other tree toward the new state
                let reached = loop {
                    if tc.should_stop() {
                        break None;
                    }
                    match self.grow(&mut trees[other], &anchor, range) {
                        Grow::Trapped => break None,
                        Grow::Reached(id) => break Some(id),
                        Grow::Advanced(id) => {
                            if other == 0 {
                                let gap = space.distance(&trees[0].states[id], &problem.goal);
                                if gap < closest.1 {
                                    closest = (id, gap);
                                }
                            }
                        }
                    }
                };
                if let Some(other_id) = reached {
                    let (start_id, goal_id) = if active == 0 {
                        (new_id, other_id)
                    } else {
                        (other_id, new_id)
                    };
                    let mut path = trees[0].path_to(start_id);
                    let mut back = trees[1].path_to(goal_id);
                    back.reverse();
                    // both trees hold the meeting state
                    path.extend(back.into_iter().skip(1));
                    let cost = crate::paths::path_length(&path, space);
                    return Ok(PlannerResult {
                        status: SolveStatus::ExactSolution,
                        path: Some(path),
                        solution_difference: Some(0.0),
                        best_cost: Some(cost),
                        run_properties: props(&trees, iterations),
                        memory_estimate: memory(&trees),
                    });
                }
            }
            let n = (trees[0].len() + trees[1].len()) as u64;
            self.publisher.publish(Snapshot {
                best_cost: None,
                iterations,
                graph_states: n,
                edges: n - 2,
            });
            active = 1 - active;
        }
        Ok(unsolved_result(
            &problem,
            Some((trees[0].path_to(closest.0), closest.1)),
            props(&trees, iterations),
            memory(&trees),
        ))
    }
}
