use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::benchlog::RunStatus;
use crate::geometry::{ProblemDef, SpaceKind, State};
use crate::paths::{path_clearance, path_length, simplify, Path};
use crate::planners::{
    new_sink, Planner, PlannerError, PlannerFactory, PlannerResult, PlannerSpec, ProgressSample, SolveStatus,
    TerminationCondition,
};
use crate::props::{TypeTag, Value};

/// Seconds a worker may keep running after the deadline before it is
/// abandoned and the run recorded as a crash.
pub const GRACE_PERIOD: f64 = 0.5;

const SIMPLIFY_SEED_SALT: u64 = 0x5eed_5a17_c0ff_ee00;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Seconds.
    pub time_limit: f64,
    pub memory_limit_bytes: u64,
    /// Seconds between progress samples.
    pub progress_interval: f64,
}

/// Outcome of one run, before it is laid out against the log schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub status: RunStatus,
    pub properties: IndexMap<String, Option<Value>>,
    pub progress: Vec<ProgressSample>,
    /// Final (simplified, for exact solutions) path.
    pub path: Option<Vec<State>>,
}

impl RunRecord {
    pub fn real(&self, name: &str) -> Option<f64> {
        self.properties.get(name)?.as_ref()?.as_f64()
    }
}

/// Run properties every planner reports, in log order.
pub fn standard_run_properties() -> Vec<(String, TypeTag)> {
    [
        ("status", TypeTag::Enum),
        ("time", TypeTag::Real),
        ("graph_states", TypeTag::Integer),
        ("iterations", TypeTag::Integer),
        ("memory", TypeTag::Integer),
        ("solution_length", TypeTag::Real),
        ("raw_solution_length", TypeTag::Real),
        ("solution_clearance", TypeTag::Real),
        ("solution_difference", TypeTag::Real),
        ("simplification_time", TypeTag::Real),
    ]
    .into_iter()
    .map(|(n, t)| (n.to_string(), t))
    .collect()
}

pub fn progress_properties() -> Vec<(String, TypeTag)> {
    vec![
        ("time".into(), TypeTag::Real),
        ("best_cost".into(), TypeTag::Real),
        ("iterations".into(), TypeTag::Integer),
    ]
}

enum WorkerOutcome {
    Solved(PlannerResult),
    Failed,
}

fn crash_record(schema: &[(String, TypeTag)], elapsed: f64) -> RunRecord {
    let mut properties: IndexMap<String, Option<Value>> = schema.iter().map(|(n, _)| (n.clone(), None)).collect();
    properties.insert("status".into(), Some(Value::Enum(RunStatus::Crash.code())));
    properties.insert("time".into(), Some(Value::Real(elapsed)));
    RunRecord {
        status: RunStatus::Crash,
        properties,
        progress: Vec::new(),
        path: None,
    }
}

/// Executes one run of `spec` on a dedicated worker thread.
///
/// The calling thread supervises: it signals the termination condition at
/// the deadline, abandons the worker if it has not returned after the grace
/// period, and meanwhile a collector thread samples the planner's progress
/// cell every `progress_interval` seconds and enforces the memory limit.
/// Failures never propagate: they become the run's status.
pub fn execute_run(
    factory: &dyn PlannerFactory,
    spec: &PlannerSpec,
    problem: &Arc<ProblemDef>,
    limits: &Limits,
    seed: u64,
) -> RunRecord {
    let mut schema = standard_run_properties();
    let mut planner: Box<dyn Planner> = match catch_unwind(AssertUnwindSafe(|| factory.create(spec, problem))) {
        Ok(Ok(p)) => p,
        _ => return crash_record(&schema, 0.0),
    };
    schema.extend(planner.extra_properties());
    let reports_progress = planner.reports_progress();
    let sink = new_sink();
    planner.register_progress_sink(sink.clone());

    let budget = Duration::from_secs_f64(limits.time_limit);
    let (tx, rx) = mpsc::channel();
    let start = Instant::now();
    let tc = TerminationCondition::new(start + budget);
    let worker_tc = tc.clone();
    let spawned = thread::Builder::new()
        .name(format!("planner-{}", spec.instance_name))
        .spawn(move || {
            let outcome = match catch_unwind(AssertUnwindSafe(|| planner.solve(&worker_tc, seed))) {
                Ok(Ok(r)) => WorkerOutcome::Solved(r),
                Ok(Err(_)) | Err(_) => WorkerOutcome::Failed,
            };
            let _ = tx.send((outcome, start.elapsed()));
        });
    if spawned.is_err() {
        return crash_record(&schema, 0.0);
    }

    let done = Arc::new(AtomicBool::new(false));
    let memory_hit = Arc::new(AtomicBool::new(false));
    let samples = Arc::new(Mutex::new(Vec::new()));
    let collector = {
        let (done, memory_hit, samples, sink, tc) = (
            done.clone(),
            memory_hit.clone(),
            samples.clone(),
            sink.clone(),
            tc.clone(),
        );
        let interval = limits.progress_interval;
        let memory_limit = limits.memory_limit_bytes;
        thread::spawn(move || {
            let mut tick = 1u64;
            loop {
                let due = start + Duration::from_secs_f64(interval * tick as f64);
                let now = Instant::now();
                if due > now {
                    thread::sleep(due - now);
                }
                if done.load(Ordering::Acquire) {
                    break;
                }
                let snap = sink.read();
                let t = start.elapsed().as_secs_f64();
                if reports_progress {
                    samples.lock().expect("progress buffer").push(ProgressSample {
                        t,
                        best_cost: snap.best_cost,
                        iterations: snap.iterations,
                    });
                }
                if snap.memory_estimate() > memory_limit && !memory_hit.swap(true, Ordering::AcqRel) {
                    tc.signal();
                }
                tick += 1;
            }
        })
    };

    let grace = Duration::from_secs_f64(GRACE_PERIOD);
    let received = loop {
        let now = Instant::now();
        let deadline = start + budget;
        let wait_until = if now < deadline { deadline } else { deadline + grace };
        match rx.recv_timeout(wait_until.saturating_duration_since(now)) {
            Ok(v) => break Some(v),
            Err(RecvTimeoutError::Timeout) => {
                if Instant::now() >= deadline + grace {
                    break None;
                }
                tc.signal();
            }
            Err(RecvTimeoutError::Disconnected) => break None,
        }
    };
    done.store(true, Ordering::Release);
    let _ = collector.join();

    let Some((outcome, elapsed)) = received else {
        // worker is left running detached; its partial data are discarded
        tc.signal();
        return crash_record(&schema, start.elapsed().as_secs_f64());
    };
    let time = elapsed.as_secs_f64();
    let result = match outcome {
        WorkerOutcome::Solved(r) => r,
        WorkerOutcome::Failed => return crash_record(&schema, time),
    };

    let mut progress = std::mem::take(&mut *samples.lock().expect("progress buffer"));
    if reports_progress {
        let snap = sink.read();
        let t = progress.last().map_or(time, |s: &ProgressSample| s.t.max(time));
        let last_t = progress.last().map(|s| s.t);
        if last_t.is_none_or(|lt| t > lt) {
            progress.push(ProgressSample {
                t,
                best_cost: snap.best_cost,
                iterations: snap.iterations,
            });
        }
    }

    let memory_exceeded = memory_hit.load(Ordering::Acquire) || result.memory_estimate > limits.memory_limit_bytes;
    let status = if memory_exceeded {
        RunStatus::MemoryLimit
    } else {
        match result.status {
            SolveStatus::ExactSolution => RunStatus::ExactSolution,
            SolveStatus::ApproximateSolution => RunStatus::ApproximateSolution,
            SolveStatus::Timeout => RunStatus::Timeout,
        }
    };

    let mut properties: IndexMap<String, Option<Value>> = schema.iter().map(|(n, _)| (n.clone(), None)).collect();
    properties.insert("status".into(), Some(Value::Enum(status.code())));
    properties.insert("time".into(), Some(Value::Real(time)));
    properties.insert("memory".into(), Some(Value::Integer(result.memory_estimate as i64)));
    for (k, v) in &result.run_properties {
        if let Some(slot) = properties.get_mut(k) {
            *slot = Some(v.clone());
        }
    }

    let mut final_path = None;
    if let (Some(raw), RunStatus::ExactSolution | RunStatus::ApproximateSolution) = (&result.path, status) {
        let raw_len = path_length(raw, &problem.space);
        properties.insert("raw_solution_length".into(), Some(Value::Real(raw_len)));
        properties.insert(
            "solution_difference".into(),
            result.solution_difference.map(Value::Real),
        );
        let path = Path::new(raw.clone()).expect("planner paths are nonempty");
        let path = if status == RunStatus::ExactSolution {
            if problem.space.kind == SpaceKind::Car1 {
                properties.insert("simplification_time".into(), Some(Value::Real(0.0)));
                path
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SIMPLIFY_SEED_SALT);
                let (simplified, secs) = simplify(&path, problem, &mut rng);
                properties.insert("simplification_time".into(), Some(Value::Real(secs)));
                simplified
            }
        } else {
            path
        };
        properties.insert("solution_length".into(), Some(Value::Real(path.length(&problem.space))));
        properties.insert(
            "solution_clearance".into(),
            Some(Value::Real(path_clearance(&path, problem))),
        );
        final_path = Some(path.states);
    }

    RunRecord {
        status,
        properties,
        progress,
        path: final_path,
    }
}

/// Creates a planner once to validate its spec and learn its settings and
/// extra properties.
pub(crate) fn probe_planner(
    factory: &dyn PlannerFactory,
    spec: &PlannerSpec,
    problem: &Arc<ProblemDef>,
) -> Result<(IndexMap<String, String>, Vec<(String, TypeTag)>, bool), PlannerError> {
    let p = factory.create(spec, problem)?;
    Ok((p.settings(), p.extra_properties(), p.reports_progress()))
}
