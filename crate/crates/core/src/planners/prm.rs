use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cost::CostModel;
use super::nn::KNearest;
use super::params::{ParamDecl, ParamKind, ParamValue, Params};
use super::progress::{memory_estimate, Snapshot};
use super::rrt_star::{k_nearest_count, DEFAULT_REWIRE_FACTOR, REWIRE_FACTOR};
use super::{
    base_properties, check_endpoints, trivial_result, unsolved_result, Planner, PlannerError, PlannerResult,
    ProgressSink, Publisher, SolveStatus, TerminationCondition,
};
use crate::geometry::{ProblemDef, State};
use crate::props::{TypeTag, Value};

const MAX_NEAREST: ParamDecl = ParamDecl {
    name: "max_nearest_neighbors",
    kind: ParamKind::Count { min: 1 },
};
const DEFAULT_MAX_NEAREST: u64 = 10;

const START: usize = 0;
const GOAL: usize = 1;

#[derive(Debug, Default)]
struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.rank.push(0);
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Undirected roadmap; every edge is stored in both adjacency lists.
#[derive(Debug, Default)]
pub(crate) struct Roadmap {
    pub states: Vec<State>,
    pub state_cost: Vec<f64>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub edge_count: usize,
    sets: DisjointSets,
}

impl Roadmap {
    fn add_milestone(&mut self, s: State, state_cost: f64) -> usize {
        self.states.push(s);
        self.state_cost.push(state_cost);
        self.adjacency.push(Vec::new());
        self.sets.push()
    }

    fn connect(&mut self, a: usize, b: usize, cost: f64) {
        self.adjacency[a].push((b, cost));
        self.adjacency[b].push((a, cost));
        self.edge_count += 1;
        self.sets.union(a, b);
    }

    /// Single-source shortest paths under the cost model's combine rule.
    fn shortest_from(&self, model: &CostModel, source: usize) -> (Vec<f64>, Vec<usize>) {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        let n = self.states.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = model.identity();
        heap.push(Entry(dist[source], source));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = model.combine(d, w);
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(Entry(nd, v));
                }
            }
        }
        (dist, prev)
    }

    fn path(&self, prev: &[usize], target: usize) -> Vec<State> {
        let mut out = vec![self.states[target]];
        let mut u = target;
        while prev[u] != usize::MAX {
            u = prev[u];
            out.push(self.states[u]);
        }
        out.reverse();
        out
    }
}

/// PRM (stops at the first start-goal connection) and PRM* (keeps adding
/// milestones with a logarithmically growing neighborhood).
pub(crate) struct Prm {
    problem: Arc<ProblemDef>,
    params: Params,
    publisher: Publisher,
    optimizing: bool,
    pub(crate) roadmap: Roadmap,
}

impl Prm {
    pub fn new(
        problem: Arc<ProblemDef>,
        given: &IndexMap<String, String>,
        optimizing: bool,
    ) -> Result<Self, PlannerError> {
        let params = if optimizing {
            Params::resolve(
                "PRMSTAR",
                &[REWIRE_FACTOR],
                &[("rewire_factor", ParamValue::Real(DEFAULT_REWIRE_FACTOR))],
                given,
            )?
        } else {
            Params::resolve(
                "PRM",
                &[MAX_NEAREST],
                &[("max_nearest_neighbors", ParamValue::Count(DEFAULT_MAX_NEAREST))],
                given,
            )?
        };
        Ok(Prm {
            problem,
            params,
            publisher: Publisher::default(),
            optimizing,
            roadmap: Roadmap::default(),
        })
    }

    fn snapshot(&self, best_cost: Option<f64>, iterations: u64) -> Snapshot {
        Snapshot {
            best_cost,
            iterations,
            graph_states: self.roadmap.states.len() as u64,
            edges: self.roadmap.edge_count as u64,
        }
    }

    fn properties(&self, iterations: u64) -> IndexMap<String, Value> {
        let mut p = base_properties(self.roadmap.states.len(), iterations);
        p.insert("roadmap_edges".into(), Value::Integer(self.roadmap.edge_count as i64));
        p
    }
}

impl Planner for Prm {
    fn planner_type(&self) -> &str {
        if self.optimizing {
            "PRMSTAR"
        } else {
            "PRM"
        }
    }

    fn settings(&self) -> IndexMap<String, String> {
        self.params.settings()
    }

    fn extra_properties(&self) -> Vec<(String, TypeTag)> {
        vec![("roadmap_edges".into(), TypeTag::Integer)]
    }

    fn reports_progress(&self) -> bool {
        self.optimizing
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
            r.run_properties.insert("roadmap_edges".into(), Value::Integer(0));
            return Ok(r);
        }
        let space = &problem.space;
        let model = CostModel::new(problem.objective);
        let threshold = problem.objective_threshold;
        let dim = space.kind.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut knn = KNearest::default();

        self.roadmap = Roadmap::default();
        self.roadmap
            .add_milestone(problem.start, model.state_cost(problem, &problem.start));
        self.roadmap
            .add_milestone(problem.goal, model.state_cost(problem, &problem.goal));
        if problem.check_motion(&problem.start, &problem.goal) {
            let m = model.motion(
                problem,
                &problem.start,
                self.roadmap.state_cost[START],
                &problem.goal,
                self.roadmap.state_cost[GOAL],
            );
            self.roadmap.connect(START, GOAL, m);
        }

        let mut iterations = 0u64;
        let mut best_cost: Option<f64> = None;
        let mut last_search = 0u64;

        while !tc.should_stop() {
            if self.roadmap.sets.same(START, GOAL) {
                if !self.optimizing {
                    break;
                }
                // shortest-path refresh, amortized against roadmap growth
                let interval = (self.roadmap.states.len() as u64 / 64).max(1);
                if best_cost.is_none() || iterations - last_search >= interval {
                    let (dist, _) = self.roadmap.shortest_from(&model, START);
                    best_cost = Some(dist[GOAL]);
                    last_search = iterations;
                    self.publisher.publish(self.snapshot(best_cost, iterations));
                    if dist[GOAL] <= threshold {
                        break;
                    }
                }
            }
            iterations += 1;
            let s = space.sample_uniform(&mut rng);
            if !problem.is_state_valid(&s) {
                self.publisher.publish(self.snapshot(best_cost, iterations));
                continue;
            }
            let sc = model.state_cost(problem, &s);
            let id = self.roadmap.add_milestone(s, sc);
            let k = if self.optimizing {
                k_nearest_count(self.params.real("rewire_factor"), dim, self.roadmap.states.len())
            } else {
                self.params.count("max_nearest_neighbors")
            };
            let nbrs = knn.query(&self.roadmap.states, &s, space, k, Some(id));
            for u in nbrs {
                if !self.optimizing && self.roadmap.sets.same(id, u) {
                    continue;
                }
                if problem.check_motion(&self.roadmap.states[u], &s) {
                    let m = model.motion(problem, &self.roadmap.states[u], self.roadmap.state_cost[u], &s, sc);
                    self.roadmap.connect(u, id, m);
                }
            }
            self.publisher.publish(self.snapshot(best_cost, iterations));
        }

        let memory = memory_estimate(self.roadmap.states.len() as u64, self.roadmap.edge_count as u64);
        let (dist, prev) = self.roadmap.shortest_from(&model, START);
        if dist[GOAL].is_finite() {
            let path = self.roadmap.path(&prev, GOAL);
            let best = Some(dist[GOAL]);
            if self.optimizing {
                self.publisher.publish(self.snapshot(best, iterations));
            }
            return Ok(PlannerResult {
                status: SolveStatus::ExactSolution,
                path: Some(path),
                solution_difference: Some(0.0),
                best_cost: best,
                run_properties: self.properties(iterations),
                memory_estimate: memory,
            });
        }
        // closest milestone reachable from the start
        let closest = (0..self.roadmap.states.len())
            .filter(|&i| dist[i].is_finite())
            .map(|i| (i, space.distance(&self.roadmap.states[i], &problem.goal)))
            .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                Some((_, bd)) if bd <= d => acc,
                _ => Some((i, d)),
            })
            .map(|(i, d)| (self.roadmap.path(&prev, i), d));
        Ok(unsolved_result(problem, closest, self.properties(iterations), memory))
    }
}
