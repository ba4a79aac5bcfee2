use std::f64::consts::E;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cost::CostModel;
use super::nn::{nearest_index, KNearest};
use super::params::{ParamDecl, ParamKind, ParamValue, Params};
use super::progress::{memory_estimate, Snapshot};
use super::rrt::{default_range, DEFAULT_GOAL_BIAS, GOAL_BIAS, RANGE};
use super::{
    base_properties, check_endpoints, trivial_result, unsolved_result, Planner, PlannerError, PlannerResult,
    ProgressSink, Publisher, SolveStatus, TerminationCondition, Tree, NO_PARENT,
};
use crate::geometry::ProblemDef;
use crate::props::{TypeTag, Value};

pub(crate) const REWIRE_FACTOR: ParamDecl = ParamDecl {
    name: "rewire_factor",
    kind: ParamKind::PositiveReal,
};
pub(crate) const DEFAULT_REWIRE_FACTOR: f64 = 1.1;

/// Neighborhood size `ceil(rewire_factor * e * (1 + 1/d) * ln n)`.
pub(crate) fn k_nearest_count(rewire_factor: f64, dimension: usize, n: usize) -> usize {
    let k_rrg = E * (1.0 + 1.0 / dimension as f64);
    ((rewire_factor * k_rrg * (n.max(2) as f64).ln()).ceil() as usize).max(1)
}

pub(crate) struct RrtStar {
    problem: Arc<ProblemDef>,
    params: Params,
    publisher: Publisher,
}

/// A tree node inside the goal region and the cost of finishing from it.
#[derive(Debug, Clone, Copy)]
struct GoalNode {
    id: usize,
    /// Cost of the final motion to the exact goal, `None` when that motion
    /// is invalid and the path ends at the node itself.
    terminal: Option<f64>,
}

struct Search {
    tree: Tree,
    cost: Vec<f64>,
    state_cost: Vec<f64>,
    /// Cost of the motion from the parent.
    incoming: Vec<f64>,
    children: Vec<Vec<usize>>,
    goal_nodes: Vec<GoalNode>,
    rewirings: u64,
}

impl Search {
    fn goal_cost(&self, model: &CostModel, g: &GoalNode) -> f64 {
        match g.terminal {
            Some(t) => model.combine(self.cost[g.id], t),
            None => self.cost[g.id],
        }
    }

    fn best(&self, model: &CostModel) -> Option<(GoalNode, f64)> {
        let mut best: Option<(GoalNode, f64)> = None;
        for g in &self.goal_nodes {
            let c = self.goal_cost(model, g);
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((*g, c));
            }
        }
        best
    }

    /// Re-derives costs below `root` after its cost changed.
    fn propagate(&mut self, model: &CostModel, root: usize) {
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for k in 0..self.children[u].len() {
                let c = self.children[u][k];
                self.cost[c] = model.combine(self.cost[u], self.incoming[c]);
                stack.push(c);
            }
        }
    }
}

impl RrtStar {
    pub fn new(problem: Arc<ProblemDef>, given: &IndexMap<String, String>) -> Result<Self, PlannerError> {
        let params = Params::resolve(
            "RRTSTAR",
            &[RANGE, GOAL_BIAS, REWIRE_FACTOR],
            &[
                ("range", default_range(&problem)),
                ("goal_bias", ParamValue::Real(DEFAULT_GOAL_BIAS)),
                ("rewire_factor", ParamValue::Real(DEFAULT_REWIRE_FACTOR)),
            ],
            given,
        )?;
        Ok(RrtStar {
            problem,
            params,
            publisher: Publisher::default(),
        })
    }
}

impl Planner for RrtStar {
    fn planner_type(&self) -> &str {
        "RRTSTAR"
    }

    fn settings(&self) -> IndexMap<String, String> {
        self.params.settings()
    }

    fn extra_properties(&self) -> Vec<(String, TypeTag)> {
        vec![("rewirings".into(), TypeTag::Integer)]
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
        if problem.in_goal(&problem.start) {
            let mut r = trivial_result(problem);
            r.run_properties.insert("rewirings".into(), Value::Integer(0));
            return Ok(r);
        }
        let space = &problem.space;
        let model = CostModel::new(problem.objective);
        let threshold = problem.objective_threshold;
        let range = self.params.real("range");
        let goal_bias = self.params.real("goal_bias");
        let rewire_factor = self.params.real("rewire_factor");
        let dim = space.kind.dimension();
        let goal_state_cost = model.state_cost(problem, &problem.goal);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Search {
            tree: Tree::with_root(problem.start),
            cost: vec![model.identity()],
            state_cost: vec![model.state_cost(problem, &problem.start)],
            incoming: vec![0.0],
            children: vec![Vec::new()],
            goal_nodes: Vec::new(),
            rewirings: 0,
        };
        let mut knn = KNearest::default();
        let mut closest = (0usize, space.distance(&problem.start, &problem.goal));
        let mut iterations = 0u64;
        let mut best_cost: Option<f64> = None;

        while !tc.should_stop() {
            iterations += 1;
            let target = if rng.random::<f64>() < goal_bias {
                problem.goal
            } else {
                space.sample_uniform(&mut rng)
            };
            let near = nearest_index(&s.tree.states, &target, space).expect("tree nonempty");
            let new = space.steer(&s.tree.states[near], &target, range);
            if problem.check_motion(&s.tree.states[near], &new) {
                let new_sc = model.state_cost(problem, &new);
                let k = k_nearest_count(rewire_factor, dim, s.tree.len() + 1);
                let nbrs = knn.query(&s.tree.states, &new, space, k, None);

                // cheapest valid parent among the neighbors
                let motion_from =
                    |s: &Search, u: usize| model.motion(problem, &s.tree.states[u], s.state_cost[u], &new, new_sc);
                let mut parent = near;
                let mut parent_motion = motion_from(&s, near);
                let mut best = model.combine(s.cost[near], parent_motion);
                let mut valid = vec![None; nbrs.len()];
                for (slot, &u) in nbrs.iter().enumerate() {
                    if u == near {
                        valid[slot] = Some(true);
                        continue;
                    }
                    let m = motion_from(&s, u);
                    let c = model.combine(s.cost[u], m);
                    if c < best {
                        let ok = problem.check_motion(&s.tree.states[u], &new);
                        valid[slot] = Some(ok);
                        if ok {
                            parent = u;
                            parent_motion = m;
                            best = c;
                        }
                    }
                }
                let id = s.tree.add(new, parent);
                s.cost.push(best);
                s.state_cost.push(new_sc);
                s.incoming.push(parent_motion);
                s.children.push(Vec::new());
                s.children[parent].push(id);

                // rewire neighbors through the new node
                for (slot, &u) in nbrs.iter().enumerate() {
                    if u == parent || s.tree.parent[u] == NO_PARENT {
                        continue;
                    }
                    let m = model.motion(problem, &new, new_sc, &s.tree.states[u], s.state_cost[u]);
                    let c = model.combine(s.cost[id], m);
                    if c < s.cost[u] {
                        let ok = match valid[slot] {
                            Some(v) => v,
                            None => problem.check_motion(&new, &s.tree.states[u]),
                        };
                        if ok {
                            let old = s.tree.parent[u];
                            s.children[old].retain(|&c| c != u);
                            s.children[id].push(u);
                            s.tree.parent[u] = id;
                            s.incoming[u] = m;
                            s.cost[u] = c;
                            s.propagate(&model, u);
                            s.rewirings += 1;
                        }
                    }
                }

                let gap = space.distance(&new, &problem.goal);
                if gap < closest.1 {
                    closest = (id, gap);
                }
                if gap <= problem.goal_tolerance {
                    let terminal = (!new.bit_eq(&problem.goal) && problem.check_motion(&new, &problem.goal))
                        .then(|| model.motion(problem, &new, new_sc, &problem.goal, goal_state_cost));
                    s.goal_nodes.push(GoalNode { id, terminal });
                }
                best_cost = s.best(&model).map(|(_, c)| c);
            }
            let n = s.tree.len() as u64;
            self.publisher.publish(Snapshot {
                best_cost,
                iterations,
                graph_states: n,
                edges: n - 1,
            });
            if best_cost.is_some_and(|c| c <= threshold) {
                break;
            }
        }

        let n = s.tree.len() as u64;
        let mut props = base_properties(s.tree.len(), iterations);
        props.insert("rewirings".into(), Value::Integer(s.rewirings as i64));
        let memory = memory_estimate(n, n - 1);
        match s.best(&model) {
            Some((g, c)) => {
                let mut path = s.tree.path_to(g.id);
                if g.terminal.is_some() {
                    path.push(problem.goal);
                }
                Ok(PlannerResult {
                    status: SolveStatus::ExactSolution,
                    path: Some(path),
                    solution_difference: Some(0.0),
                    best_cost: Some(c),
                    run_properties: props,
                    memory_estimate: memory,
                })
            }
            None => Ok(unsolved_result(
                problem,
                Some((s.tree.path_to(closest.0), closest.1)),
                props,
                memory,
            )),
        }
    }
}
