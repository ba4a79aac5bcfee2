use std::sync::Arc;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::car::{propagate_car_trajectory, CarModel};
use super::nn::nearest_index;
use super::params::{ParamDecl, ParamKind, ParamValue, Params};
use super::progress::{memory_estimate, Snapshot};
use super::rrt::{DEFAULT_GOAL_BIAS, GOAL_BIAS};
use super::{
    base_properties, check_endpoints, trivial_result, unsolved_result, Planner, PlannerError, PlannerResult,
    ProgressSink, Publisher, SolveStatus, TerminationCondition, Tree, NO_PARENT,
};
use crate::geometry::{ProblemDef, State};
use crate::props::{TypeTag, Value};

const ANY_REAL: ParamKind = ParamKind::Real {
    min: f64::MIN,
    max: f64::MAX,
};

const DECLS: [ParamDecl; 9] = [
    ParamDecl {
        name: "control_samples",
        kind: ParamKind::Count { min: 1 },
    },
    GOAL_BIAS,
    ParamDecl {
        name: "wheelbase",
        kind: ParamKind::PositiveReal,
    },
    ParamDecl {
        name: "min_speed",
        kind: ANY_REAL,
    },
    ParamDecl {
        name: "max_speed",
        kind: ANY_REAL,
    },
    ParamDecl {
        name: "max_steering",
        kind: ParamKind::Real { min: 0.0, max: 1.5 },
    },
    ParamDecl {
        name: "min_duration",
        kind: ParamKind::PositiveReal,
    },
    ParamDecl {
        name: "max_duration",
        kind: ParamKind::PositiveReal,
    },
    ParamDecl {
        name: "propagation_step",
        kind: ParamKind::PositiveReal,
    },
];

/// RRT over controls: each extension samples `control_samples` random
/// controls from the nearest node and keeps the one ending closest to the
/// sampled target.
pub(crate) struct Crrt {
    problem: Arc<ProblemDef>,
    params: Params,
    model: CarModel,
    publisher: Publisher,
}

impl Crrt {
    pub fn new(problem: Arc<ProblemDef>, given: &IndexMap<String, String>) -> Result<Self, PlannerError> {
        let d = CarModel::default();
        let params = Params::resolve(
            "CRRT",
            &DECLS,
            &[
                ("control_samples", ParamValue::Count(10)),
                ("goal_bias", ParamValue::Real(DEFAULT_GOAL_BIAS)),
                ("wheelbase", ParamValue::Real(d.wheelbase)),
                ("min_speed", ParamValue::Real(d.min_speed)),
                ("max_speed", ParamValue::Real(d.max_speed)),
                ("max_steering", ParamValue::Real(d.max_steering)),
                ("min_duration", ParamValue::Real(d.min_duration)),
                ("max_duration", ParamValue::Real(d.max_duration)),
                ("propagation_step", ParamValue::Real(0.05)),
            ],
            given,
        )?;
        let model = CarModel {
            wheelbase: params.real("wheelbase"),
            min_speed: params.real("min_speed"),
            max_speed: params.real("max_speed"),
            max_steering: params.real("max_steering"),
            min_duration: params.real("min_duration"),
            max_duration: params.real("max_duration"),
        };
        let ordered = |lo: &str, hi: &str, a: f64, b: f64| {
            if a <= b {
                Ok(())
            } else {
                Err(PlannerError::BadParameterValue {
                    planner: "CRRT".into(),
                    name: lo.into(),
                    value: a.to_string(),
                    reason: format!("exceeds {hi}"),
                })
            }
        };
        ordered("min_speed", "max_speed", model.min_speed, model.max_speed)?;
        ordered("min_duration", "max_duration", model.min_duration, model.max_duration)?;
        Ok(Crrt {
            problem,
            params,
            model,
            publisher: Publisher::default(),
        })
    }

    fn trajectory_valid(&self, from: &State, traj: &[State]) -> bool {
        let mut prev = from;
        for s in traj {
            if !self.problem.check_motion(prev, s) {
                return false;
            }
            prev = s;
        }
        true
    }
}

/// Tree whose edges are integrated trajectories.
struct ControlTree {
    tree: Tree,
    /// Intermediate states from the parent, ending at the node itself.
    segments: Vec<Vec<State>>,
}

impl ControlTree {
    fn path_to(&self, i: usize) -> Vec<State> {
        let mut chain = vec![i];
        let mut u = i;
        while self.tree.parent[u] != NO_PARENT {
            u = self.tree.parent[u];
            chain.push(u);
        }
        chain.reverse();
        let mut out = vec![self.tree.states[chain[0]]];
        for &n in &chain[1..] {
            out.extend_from_slice(&self.segments[n]);
        }
        out
    }
}

impl Planner for Crrt {
    fn planner_type(&self) -> &str {
        "CRRT"
    }

    fn settings(&self) -> IndexMap<String, String> {
        self.params.settings()
    }

    fn extra_properties(&self) -> Vec<(String, TypeTag)> {
        vec![("best_goal_distance".into(), TypeTag::Real)]
    }

    fn reports_progress(&self) -> bool {
        true
    }

    fn register_progress_sink(&mut self, sink: ProgressSink) {
        self.publisher.set(sink);
    }

    fn solve(&mut self, tc: &TerminationCondition, seed: u64) -> Result<PlannerResult, PlannerError> {
        let problem = self.problem.clone();
        let problem: &ProblemDef = &problem;
        check_endpoints(problem)?;
        let space = &problem.space;
        let start_gap = space.distance(&problem.start, &problem.goal);
        if problem.in_goal(&problem.start) {
            let mut r = trivial_result(problem);
            r.run_properties
                .insert("best_goal_distance".into(), Value::Real(start_gap));
            return Ok(r);
        }
        let samples = self.params.count("control_samples");
        let goal_bias = self.params.real("goal_bias");
        let step = self.params.real("propagation_step");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ct = ControlTree {
            tree: Tree::with_root(problem.start),
            segments: vec![Vec::new()],
        };
        let mut closest = (0usize, start_gap);
        let mut iterations = 0u64;
        let mut solved = None;

        while !tc.should_stop() {
            iterations += 1;
            let target = if rng.random::<f64>() < goal_bias {
                problem.goal
            } else {
                space.sample_uniform(&mut rng)
            };
            let near = nearest_index(&ct.tree.states, &target, space).expect("tree nonempty");
            let from = ct.tree.states[near];
            let mut best: Option<(Vec<State>, f64)> = None;
            for _ in 0..samples {
                let u = self.model.sample_control(&mut rng);
                let traj = propagate_car_trajectory(&from, &u, step, self.model.wheelbase);
                let d = space.distance(traj.last().expect("at least one sub-step"), &target);
                if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                    best = Some((traj, d));
                }
            }
            let (traj, _) = best.expect("control_samples >= 1");
            let end = *traj.last().expect("at least one sub-step");
            if space.in_bounds(&end) && self.trajectory_valid(&from, &traj) {
                let id = ct.tree.add(end, near);
                ct.segments.push(traj);
                let gap = space.distance(&end, &problem.goal);
                if gap < closest.1 {
                    closest = (id, gap);
                }
                if gap <= problem.goal_tolerance {
                    solved = Some(id);
                }
            }
            let n = ct.tree.len() as u64;
            self.publisher.publish(Snapshot {
                best_cost: Some(closest.1),
                iterations,
                graph_states: n,
                edges: n - 1,
            });
            if solved.is_some() {
                break;
            }
        }

        let n = ct.tree.len() as u64;
        let mut props = base_properties(ct.tree.len(), iterations);
        props.insert("best_goal_distance".into(), Value::Real(closest.1));
        let memory = memory_estimate(n, n - 1);
        if let Some(id) = solved {
            let path = ct.path_to(id);
            let cost = crate::paths::path_length(&path, space);
            return Ok(PlannerResult {
                status: SolveStatus::ExactSolution,
                path: Some(path),
                solution_difference: Some(0.0),
                best_cost: Some(cost),
                run_properties: props,
                memory_estimate: memory,
            });
        }
        Ok(unsolved_result(
            problem,
            Some((ct.path_to(closest.0), closest.1)),
            props,
            memory,
        ))
    }
}
