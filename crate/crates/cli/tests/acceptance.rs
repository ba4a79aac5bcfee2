//! Acceptance suite. Each test prints one `PASS` or `FAIL` line naming its
//! criterion, with the pinned tolerance and runtime budget.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use plannerbench_arena::plot::{build_plot, PlotData, PlotKind, PlotOptions, PlotQuery};
use plannerbench_core::benchlog::{
    parse_log, write_log, ExperimentLog, PlannerBlock, PropertyDecl, RunRecord, RunStatus,
};
use plannerbench_core::geometry::ProblemDef;
use plannerbench_core::planners::{
    BuiltinPlanners, Planner, PlannerError, PlannerFactory, PlannerResult, PlannerSpec, ProgressSink,
    TerminationCondition,
};
use plannerbench_core::props::{TypeTag, Value};
use plannerbench_core::runner::{load_config, parse_config, run_benchmark, RunOptions};
use plannerbench_core::stats::{
    boxplot_stats, ecdf, progress_aggregate, regression_aggregate, success_fraction, Series,
};
use plannerbench_db::ResultsDb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STATS_TOL: f64 = 1e-12;
const CONTAINMENT_SLACK_S: f64 = 1.5;
const CONVERGENCE_REL_TOL: f64 = 0.05;
const TREND_RUNS: u64 = 50;

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($fmt)+));
        }
    };
}

/// Runs one criterion and prints its verdict line.
fn criterion(name: &str, budget: Duration, body: impl FnOnce() -> Result<String, String>) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let outcome = match result {
        Ok(detail) if elapsed <= budget => Ok(detail),
        Ok(detail) => Err(format!("{detail}; over budget")),
        Err(e) => Err(e),
    };
    let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), budget.as_secs());
    match outcome {
        Ok(detail) => {
            println!("PASS {name}: {detail} ({timing})");
            true
        }
        Err(e) => {
            println!("FAIL {name}: {e} ({timing})");
            false
        }
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn problems_dir() -> PathBuf {
    repo_root().join("crates/core/problems")
}

fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(repo_root().join("fixtures").join(rel)).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= STATS_TOL * (1.0 + a.abs().max(b.abs()))
}

fn close_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => close(a, b),
        (None, None) => true,
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// log round-trip

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const POOL: &[&str] = &[
        "a", "Z", "0", " ", ";", ",", "=", "\\", "\n", "\t", "\r", ".", "N/A", "é", "日", ":", "-", "planner", "runs",
    ];
    if rng.random_bool(0.05) {
        return "N/A".into();
    }
    let n = rng.random_range(0..8);
    (0..n).map(|_| POOL[rng.random_range(0..POOL.len())]).collect()
}

fn random_name(rng: &mut ChaCha8Rng) -> String {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
    let mut s = String::from(FIRST[rng.random_range(0..FIRST.len())] as char);
    for _ in 0..rng.random_range(0..10) {
        s.push(REST[rng.random_range(0..REST.len())] as char);
    }
    s
}

fn random_tag(rng: &mut ChaCha8Rng) -> TypeTag {
    [
        TypeTag::Integer,
        TypeTag::Real,
        TypeTag::Boolean,
        TypeTag::Enum,
        TypeTag::String,
    ][rng.random_range(0..5)]
}

fn random_value(rng: &mut ChaCha8Rng, tag: TypeTag) -> Option<Value> {
    if rng.random_bool(0.25) {
        return None;
    }
    Some(match tag {
        TypeTag::Integer => Value::Integer(if rng.random_bool(0.5) {
            rng.random()
        } else {
            rng.random_range(-100..100)
        }),
        TypeTag::Enum => Value::Enum(rng.random_range(0..5)),
        TypeTag::Boolean => Value::Boolean(rng.random()),
        TypeTag::Real => Value::Real(match rng.random_range(0..5) {
            0 => f64::INFINITY,
            1 => f64::NEG_INFINITY,
            2 => loop {
                let v = f64::from_bits(rng.random());
                if !v.is_nan() {
                    break v;
                }
            },
            _ => rng.random_range(-1e3..1e3),
        }),
        TypeTag::String => Value::String(random_text(rng)),
    })
}

fn random_schema(rng: &mut ChaCha8Rng, max: usize) -> Vec<PropertyDecl> {
    let mut out: Vec<PropertyDecl> = Vec::new();
    for _ in 0..rng.random_range(0..max) {
        let name = random_name(rng);
        if !out.iter().any(|d| d.name == name) {
            out.push(PropertyDecl::new(name, random_tag(rng)));
        }
    }
    out
}

fn random_planner(rng: &mut ChaCha8Rng) -> PlannerBlock {
    let run_schema = random_schema(rng, 8);
    let mut progress_schema = vec![PropertyDecl::new("time", TypeTag::Real)];
    progress_schema.extend(random_schema(rng, 3).into_iter().filter(|d| d.name != "time"));
    let nruns = rng.random_range(0..4);
    let has_progress = nruns > 0 && rng.random_bool(0.5);
    let runs = (0..nruns)
        .map(|_| RunRecord {
            values: run_schema.iter().map(|d| random_value(rng, d.tag)).collect(),
            progress: if has_progress {
                (0..rng.random_range(0..4))
                    .map(|_| progress_schema.iter().map(|d| random_value(rng, d.tag)).collect())
                    .collect()
            } else {
                Vec::new()
            },
        })
        .collect();
    PlannerBlock {
        name: random_text(rng),
        settings: (0..rng.random_range(0..4))
            .map(|_| (random_text(rng), random_text(rng)))
            .collect(),
        run_schema,
        runs,
        progress_schema,
        has_progress,
    }
}

fn random_log(rng: &mut ChaCha8Rng) -> ExperimentLog {
    const CPU: &[&str] = &["model name", "\t", ": ", "x86", "\n", ".", "\n.\n", "é"];
    ExperimentLog {
        name: random_text(rng),
        version: random_text(rng),
        hostname: random_text(rng),
        cpuinfo: (0..rng.random_range(0..10))
            .map(|_| CPU[rng.random_range(0..CPU.len())])
            .collect(),
        date: random_text(rng),
        seed: rng.random(),
        time_limit: rng.random_range(0.0..1e4),
        memory_limit_mb: rng.random_range(0.0..1e6),
        run_count: rng.random_range(1..100),
        total_time: rng.random_range(0.0..1e5),
        problem_properties: (0..rng.random_range(0..3))
            .map(|_| (random_text(rng), random_text(rng)))
            .collect(),
        planners: (0..rng.random_range(0..4)).map(|_| random_planner(rng)).collect(),
    }
}

fn log_round_trip() -> bool {
    criterion("log round-trip", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut runs = 0;
        for i in 0..1000 {
            let log = random_log(&mut rng);
            runs += log.planners.iter().map(|p| p.runs.len()).sum::<usize>();
            let text = write_log(&log).map_err(|e| format!("log {i}: write failed: {e}"))?;
            let back = parse_log(&text).map_err(|e| format!("log {i}: parse failed: {e}"))?;
            check!(back == log, "log {i} differs after the round trip");
        }
        Ok(format!("1000 logs, {runs} runs, parse(write(x)) == x"))
    })
}

// ---------------------------------------------------------------------------
// dynamic schema

type RunRow = (String, i64, f64, Option<f64>);

fn dynamic_schema() -> bool {
    criterion("dynamic schema", Duration::from_secs(1), || {
        let a = parse_log(&read_fixture("schema/a.log")).map_err(|e| e.to_string())?;
        let b = parse_log(&read_fixture("schema/b.log")).map_err(|e| e.to_string())?;
        let mut db = ResultsDb::open_in_memory().map_err(|e| e.to_string())?;
        db.ingest_log(&a).map_err(|e| e.to_string())?;
        db.ingest_log(&b).map_err(|e| e.to_string())?;
        let conn = db.connection();

        let mut stmt = conn
            .prepare("SELECT name FROM pragma_table_info('runs') ORDER BY cid")
            .unwrap();
        let columns: Vec<String> = stmt.query_map([], |r| r.get(0)).unwrap().map(Result::unwrap).collect();
        check!(
            columns == ["id", "experimentid", "plannerid", "status", "time", "cool_metric"],
            "runs columns {columns:?}"
        );

        let mut stmt = conn
            .prepare(
                "SELECT p.name, r.status, r.time, r.cool_metric FROM runs r
                 JOIN plannerConfigs p ON p.id = r.plannerid ORDER BY r.id",
            )
            .unwrap();
        let rows: Vec<RunRow> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?)))
            .unwrap()
            .map(Result::unwrap)
            .collect();
        let want: Vec<RunRow> = vec![
            ("foreign".into(), 0, 0.125, Some(1.5)),
            ("foreign".into(), 1, 0.25, Some(2.5)),
            ("foreign".into(), 0, 0.0625, None),
            ("rrt".into(), 0, 0.5, None),
            ("rrt".into(), 2, 1.0, None),
        ];
        check!(rows == want, "runs rows {rows:?}");

        let mut stmt = conn
            .prepare("SELECT name, value, description FROM enums ORDER BY name, value")
            .unwrap();
        let enums: Vec<(String, i64, String)> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?)))
            .unwrap()
            .map(Result::unwrap)
            .collect();
        let want: Vec<(String, i64, String)> = [
            "EXACT_SOLUTION",
            "APPROXIMATE_SOLUTION",
            "TIMEOUT",
            "MEMORY_LIMIT",
            "CRASH",
        ]
        .iter()
        .enumerate()
        .map(|(i, l)| ("status".to_string(), i as i64, l.to_string()))
        .collect();
        check!(enums == want, "enums rows {enums:?}");

        let experiments: i64 = conn
            .query_row("SELECT count(*) FROM experiments", [], |r| r.get(0))
            .unwrap();
        check!(experiments == 2, "{experiments} experiments");
        let entities = db.list_entities().map_err(|e| e.to_string())?;
        check!(
            entities
                .run_attributes
                .iter()
                .any(|p| p.name == "cool_metric" && p.tag == TypeTag::Real),
            "cool_metric not listed as a REAL attribute"
        );
        Ok("6 runs columns, 5 run rows with 3 NULL cool_metric, 5 enums rows".into())
    })
}

// ---------------------------------------------------------------------------
// runner containment

/// RRT that panics on one seed.
struct Flaky {
    inner: Box<dyn Planner>,
    crash_seed: u64,
}

impl Planner for Flaky {
    fn planner_type(&self) -> &str {
        "FLAKY"
    }
    fn settings(&self) -> IndexMap<String, String> {
        self.inner.settings()
    }
    fn register_progress_sink(&mut self, sink: ProgressSink) {
        self.inner.register_progress_sink(sink)
    }
    fn solve(&mut self, tc: &TerminationCondition, seed: u64) -> Result<PlannerResult, PlannerError> {
        if seed == self.crash_seed {
            panic!("injected failure");
        }
        self.inner.solve(tc, seed)
    }
}

struct WithFlaky {
    crash_seed: u64,
}

impl PlannerFactory for WithFlaky {
    fn create(&self, spec: &PlannerSpec, problem: &Arc<ProblemDef>) -> Result<Box<dyn Planner>, PlannerError> {
        if spec.planner_type != "FLAKY" {
            return BuiltinPlanners.create(spec, problem);
        }
        let mut inner = spec.clone();
        inner.planner_type = "RRT".into();
        Ok(Box::new(Flaky {
            inner: BuiltinPlanners.create(&inner, problem)?,
            crash_seed: self.crash_seed,
        }))
    }
}

fn mask_timing(log: &mut ExperimentLog) {
    log.date.clear();
    log.total_time = 0.0;
    log.cpuinfo.clear();
    for p in &mut log.planners {
        let cols: Vec<usize> = ["time", "simplification_time"]
            .iter()
            .filter_map(|n| p.column(n))
            .collect();
        for r in &mut p.runs {
            for &c in &cols {
                if r.values[c].is_some() {
                    r.values[c] = Some(Value::Real(0.0));
                }
            }
            r.progress.clear();
        }
    }
}

fn runner_containment() -> bool {
    criterion("runner containment", Duration::from_secs(120), || {
        let text = "[problem]\nworld = corridor\nspace = R2\nstart = 1 1.5\ngoal = 1 14.5\n\
                    objective_threshold = 0\n[benchmark]\ntime_limit = 1\nrun_count = 10\nseed = 500\n\
                    [planner:flaky]\ntype = FLAKY\n[planner:rrt]\ntype = RRT\n\
                    [planner:rrtconnect]\ntype = RRTCONNECT\n[planner:prm]\ntype = PRM\n\
                    [planner:rrtstar]\ntype = RRTSTAR\n";
        let spec = parse_config(text, Path::new(".")).map_err(|e| e.to_string())?;
        let crash_run = 3;
        let crashing = run_benchmark(
            &spec,
            &WithFlaky {
                crash_seed: 500 + crash_run,
            },
            &RunOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let baseline = run_benchmark(&spec, &WithFlaky { crash_seed: u64::MAX }, &RunOptions::default())
            .map_err(|e| e.to_string())?;

        let mut worst: f64 = 0.0;
        for log in [&crashing, &baseline] {
            for p in &log.planners {
                for run in 0..p.runs.len() {
                    if p.status(run) == Some(RunStatus::Crash) {
                        continue;
                    }
                    let t = p.value(run, "time").and_then(Value::as_f64).ok_or("run without time")?;
                    worst = worst.max(t);
                    check!(t <= CONTAINMENT_SLACK_S, "{} run {run} took {t} s", p.name);
                }
            }
        }
        let flaky = &crashing.planners[0];
        check!(
            flaky.status(crash_run as usize) == Some(RunStatus::Crash),
            "injected failure recorded as {:?}",
            flaky.status(crash_run as usize)
        );
        let crashes = crashing
            .planners
            .iter()
            .flat_map(|p| (0..p.runs.len()).map(move |r| p.status(r)))
            .filter(|s| *s == Some(RunStatus::Crash))
            .count();
        check!(crashes == 1, "{crashes} CRASH runs, expected 1");

        let (mut a, mut b) = (crashing.clone(), baseline.clone());
        mask_timing(&mut a);
        mask_timing(&mut b);
        for (pa, pb) in a
            .planners
            .iter()
            .zip(&b.planners)
            .skip(1)
            .filter(|(p, _)| p.name != "rrtstar")
        {
            check!(pa == pb, "{} differs from the crash-free baseline", pa.name);
        }
        for run in (0..a.planners[0].runs.len()).filter(|r| *r != crash_run as usize) {
            check!(
                a.planners[0].runs[run] == b.planners[0].runs[run],
                "flaky run {run} differs from baseline"
            );
        }
        Ok(format!(
            "50 runs per log, slowest non-crash run {worst:.3} s <= {CONTAINMENT_SLACK_S} s, CRASH contained"
        ))
    })
}

// ---------------------------------------------------------------------------
// stats oracles

fn random_samples(rng: &mut ChaCha8Rng) -> Vec<Option<f64>> {
    let n = rng.random_range(1..80);
    let p_missing = rng.random_range(0.0..0.4);
    (0..n)
        .map(|_| {
            if rng.random_bool(p_missing) {
                None
            } else if rng.random_bool(0.1) {
                Some(rng.random_range(-1e3..1e3))
            } else {
                Some(rng.random_range(0..40) as f64 * 0.25)
            }
        })
        .collect()
}

/// Insertion sort, to stay independent of the library's ordering.
fn sorted(values: &[Option<f64>]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values.iter().flatten() {
        let at = out.iter().position(|x| x > v).unwrap_or(out.len());
        out.insert(at, *v);
    }
    out
}

/// Linear interpolation between order statistics at rank (n - 1) p.
fn brute_quantile(s: &[f64], p: f64) -> f64 {
    let rank = (s.len() - 1) as f64 * p;
    let below = rank.floor();
    let frac = rank - below;
    let i = below as usize;
    if frac == 0.0 {
        s[i]
    } else {
        s[i] + frac * (s[i + 1] - s[i])
    }
}

fn stats_check_box(s: &[Option<f64>]) -> Result<(), String> {
    let b = boxplot_stats(s);
    let v = sorted(s);
    check!(b.n == v.len() && b.n_missing == s.len() - v.len(), "box counts");
    if v.is_empty() {
        check!(b.median.is_none(), "median of nothing");
        return Ok(());
    }
    let (q1, med, q3) = (
        brute_quantile(&v, 0.25),
        brute_quantile(&v, 0.5),
        brute_quantile(&v, 0.75),
    );
    check!(
        close_opt(b.q1, Some(q1)) && close_opt(b.median, Some(med)) && close_opt(b.q3, Some(q3)),
        "quartiles of {v:?}"
    );
    let fence_lo = q1 - 1.5 * (q3 - q1);
    let fence_hi = q3 + 1.5 * (q3 - q1);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= fence_lo && *x <= fence_hi).collect();
    let outside: Vec<f64> = v.iter().copied().filter(|x| *x < fence_lo || *x > fence_hi).collect();
    check!(
        b.whisker_low == inside.first().copied() && b.whisker_high == inside.last().copied(),
        "whiskers of {v:?}"
    );
    check!(b.outliers == outside, "outliers of {v:?}");
    let half = 1.58 * (q3 - q1) / (v.len() as f64).sqrt();
    check!(
        close_opt(b.notch_low, Some(med - half)) && close_opt(b.notch_high, Some(med + half)),
        "notch of {v:?}"
    );
    Ok(())
}

fn stats_check_ecdf(s: &[Option<f64>]) -> Result<(), String> {
    let v = sorted(s);
    let Ok(points) = ecdf(s) else {
        check!(v.is_empty(), "ecdf refused defined samples");
        return Ok(());
    };
    let mut distinct = v.clone();
    distinct.dedup();
    check!(points.len() == distinct.len(), "ecdf steps");
    for (pt, x) in points.iter().zip(&distinct) {
        let below = s.iter().filter(|o| matches!(o, Some(y) if y <= x)).count();
        check!(pt.x == *x && close(pt.f, below as f64 / s.len() as f64), "ecdf at {x}");
    }
    Ok(())
}

/// Roots of (n + z^2) p^2 - (2k + z^2) p + k^2 / n = 0.
fn wilson_roots(k: usize, n: usize) -> (f64, f64) {
    let z2: f64 = 1.96 * 1.96;
    let (k, n) = (k as f64, n as f64);
    let a = n + z2;
    let b = -(2.0 * k + z2);
    let c = k * k / n;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    ((-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a))
}

fn stats_check_fraction(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(1..300);
    let statuses: Vec<Option<RunStatus>> = (0..n)
        .map(|_| {
            if rng.random_bool(0.1) {
                None
            } else {
                Some(RunStatus::ALL[rng.random_range(0..5)])
            }
        })
        .collect();
    let k = statuses
        .iter()
        .filter(|s| matches!(s, Some(RunStatus::ExactSolution)))
        .count();
    let f = success_fraction(&statuses).ok_or("no fraction")?;
    let (lo, hi) = wilson_roots(k, n);
    check!(
        f.successes == k && f.n == n && close(f.fraction, k as f64 / n as f64),
        "fraction {k}/{n}"
    );
    // the quadratic loses digits near the bounds, so compare at 1e-12 absolute there
    check!(
        (f.low - lo).abs() <= 1e-12 && (f.high - hi).abs() <= 1e-12,
        "wilson {k}/{n}: ({}, {}) vs ({lo}, {hi})",
        f.low,
        f.high
    );
    Ok(())
}

fn stats_check_regression(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let versions = ["1.0", "1.1", "2.0", "0.9"];
    let groups: Vec<(String, Vec<Option<f64>>)> = (0..rng.random_range(1..6))
        .map(|_| {
            (
                versions[rng.random_range(0..versions.len())].to_string(),
                random_samples(rng),
            )
        })
        .collect();
    let bars = regression_aggregate(&groups);
    let mut expected = Vec::new();
    let mut names: Vec<&str> = versions
        .iter()
        .copied()
        .filter(|v| groups.iter().any(|(g, _)| g == v))
        .collect();
    names.sort();
    for ver in names {
        let all: Vec<Option<f64>> = groups
            .iter()
            .filter(|(g, _)| g == ver)
            .flat_map(|(_, s)| s.clone())
            .collect();
        let v = sorted(&all);
        if v.is_empty() {
            continue;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let se =
            (v.len() > 1).then(|| (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt());
        expected.push((ver.to_string(), mean, se, v.len()));
    }
    check!(bars.len() == expected.len(), "bar count");
    for (bar, (ver, mean, se, n)) in bars.iter().zip(&expected) {
        check!(&bar.version == ver && bar.n == *n, "bar {ver}");
        check!(
            close(bar.mean, *mean) && close_opt(bar.std_error, *se),
            "bar {ver}: {bar:?} vs {mean} {se:?}"
        );
    }
    Ok(())
}

fn stats_oracles() -> bool {
    criterion("stats oracles", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for i in 0..1000 {
            let s = random_samples(&mut rng);
            stats_check_box(&s).map_err(|e| format!("boxplot input {i}: {e}"))?;
            stats_check_ecdf(&s).map_err(|e| format!("ecdf input {i}: {e}"))?;
            stats_check_fraction(&mut rng).map_err(|e| format!("success fraction input {i}: {e}"))?;
            stats_check_regression(&mut rng).map_err(|e| format!("regression input {i}: {e}"))?;
        }

        let series: Vec<Series> = vec![vec![(0.0, Some(10.0))], vec![(0.0, Some(20.0))]];
        let agg = progress_aggregate(&series, 1.0, 0.1, 1).map_err(|e| e.to_string())?;
        let half = 1.96 * 50f64.sqrt() / 2f64.sqrt();
        check!((half - 9.8).abs() < STATS_TOL, "closed-form half-width {half}");
        for k in 0..agg.grid.len() {
            check!(
                close_opt(agg.mean[k], Some(15.0)),
                "mean at {}: {:?}",
                agg.grid[k],
                agg.mean[k]
            );
            check!(
                close_opt(agg.ci_low[k], Some(15.0 - 9.8)) && close_opt(agg.ci_high[k], Some(15.0 + 9.8)),
                "band at {}: {:?}..{:?}",
                agg.grid[k],
                agg.ci_low[k],
                agg.ci_high[k]
            );
        }
        Ok(format!(
            "4 x 1000 oracle comparisons at {STATS_TOL:e}; two-constant series mean 15, half-width 9.8 on {} grid points",
            agg.grid.len()
        ))
    })
}

// ---------------------------------------------------------------------------
// trend

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn bidirectional_trend() -> bool {
    criterion(
        "trend: RRT-Connect vs RRT on corridor",
        Duration::from_secs(300),
        || {
            let mut spec = load_config(&problems_dir().join("corridor.cfg")).map_err(|e| e.to_string())?;
            spec.planners
                .retain(|p| p.planner_type == "RRT" || p.planner_type == "RRTCONNECT");
            check!(
                spec.planners.len() == 2 && spec.run_count == TREND_RUNS,
                "shipped corridor config changed"
            );
            let log = run_benchmark(&spec, &BuiltinPlanners, &RunOptions::default()).map_err(|e| e.to_string())?;
            let med = |ty: &str| {
                let p = log.planners.iter().find(|p| p.settings["type"] == ty).unwrap();
                median(
                    (0..p.runs.len())
                        .filter_map(|r| p.value(r, "time").and_then(Value::as_f64))
                        .collect(),
                )
            };
            let (rrt, connect) = (med("RRT"), med("RRTCONNECT"));
            check!(connect <= rrt, "median RRT-Connect {connect:.6} s > RRT {rrt:.6} s");
            Ok(format!(
                "seed {}, {TREND_RUNS} runs each: median RRT-Connect {connect:.6} s <= RRT {rrt:.6} s",
                spec.seed
            ))
        },
    )
}

// ---------------------------------------------------------------------------
// convergence

fn rrtstar_convergence() -> bool {
    criterion("convergence: RRT* on empty world", Duration::from_secs(300), || {
        let spec = load_config(&problems_dir().join("empty.cfg")).map_err(|e| e.to_string())?;
        check!(
            spec.run_count == 20 && spec.time_limit == 10.0,
            "shipped empty config changed"
        );
        let log = run_benchmark(&spec, &BuiltinPlanners, &RunOptions::default()).map_err(|e| e.to_string())?;
        let p = &log.planners[0];
        let cost_col = p
            .progress_schema
            .iter()
            .position(|d| d.name == "best_cost")
            .ok_or("no best_cost")?;
        for (i, run) in p.runs.iter().enumerate() {
            let costs: Vec<f64> = run
                .progress
                .iter()
                .filter_map(|t| t[cost_col].as_ref().and_then(Value::as_f64))
                .collect();
            check!(!costs.is_empty(), "run {i} has no cost samples");
            check!(costs.windows(2).all(|w| w[1] <= w[0]), "run {i} cost stream increases");
        }

        let mut db = ResultsDb::open_in_memory().map_err(|e| e.to_string())?;
        db.ingest_log(&log).map_err(|e| e.to_string())?;
        let query = PlotQuery {
            kind: PlotKind::Progress,
            problem: log.name.clone(),
            attribute: "best_cost".into(),
            version: None,
            planners: None,
            options: PlotOptions::default(),
        };
        let PlotData::Progress(plot) = build_plot(&db, &query).map_err(|e| e.to_string())? else {
            return Err("not a progress plot".into());
        };
        let agg = &plot.planners[0].aggregate;
        let last = agg.grid.len() - 1;
        check!((agg.grid[last] - 10.0).abs() < 1e-9, "grid ends at {}", agg.grid[last]);
        let mean = agg.mean[last].ok_or("mean undefined at t = 10 s")?;
        let straight = 128f64.sqrt();
        let rel = (mean - straight) / straight;
        check!(
            rel.abs() <= CONVERGENCE_REL_TOL,
            "mean {mean} is {:.2}% off {straight}",
            rel * 100.0
        );
        Ok(format!(
            "20 nonincreasing streams; mean at t = 10 s {mean:.4} vs {straight:.4} ({:+.3}%, limit {}%)",
            rel * 100.0,
            CONVERGENCE_REL_TOL * 100.0
        ))
    })
}

// ---------------------------------------------------------------------------
// missing data

fn missing_data_accounting() -> bool {
    criterion("missing-data accounting", Duration::from_secs(1), || {
        let log = parse_log(&read_fixture("missing/sparse.log")).map_err(|e| e.to_string())?;
        let mut db = ResultsDb::open_in_memory().map_err(|e| e.to_string())?;
        db.ingest_log(&log).map_err(|e| e.to_string())?;
        let query = PlotQuery {
            kind: PlotKind::Performance,
            problem: "sparse".into(),
            attribute: "solution_length".into(),
            version: None,
            planners: None,
            options: PlotOptions::default(),
        };
        let PlotData::Performance(plot) = build_plot(&db, &query).map_err(|e| e.to_string())? else {
            return Err("not a performance plot".into());
        };
        check!(plot.missing.len() == 1, "{} missing rows", plot.missing.len());
        let row = &plot.missing[0];
        check!(
            (row.n_total, row.n_missing) == (100, 99),
            "missing row ({}, {})",
            row.n_total,
            row.n_missing
        );
        let b = plot.planners[0].box_stats.as_ref().ok_or("no box")?;
        let v = Some(42.25);
        check!(b.n == 1 && b.n_missing == 99, "box counts {} / {}", b.n, b.n_missing);
        check!(
            [
                b.median,
                b.q1,
                b.q3,
                b.whisker_low,
                b.whisker_high,
                b.notch_low,
                b.notch_high
            ]
            .iter()
            .all(|x| *x == v),
            "box {b:?}"
        );
        check!(b.outliers.is_empty(), "outliers {:?}", b.outliers);
        Ok("missing row (100, 99); box collapses to the single value 42.25".into())
    })
}

// ---------------------------------------------------------------------------
// server determinism

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn start_server(db: &Path) -> Result<(Server, SocketAddr), String> {
    let port = free_port();
    let child = Command::new(env!("CARGO_BIN_EXE_plannerbench"))
        .args(["serve", "--port", &port.to_string(), "--db"])
        .arg(db)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let server = Server(child);
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let deadline = Instant::now() + Duration::from_secs(10);
    while TcpStream::connect(addr).is_err() {
        check!(Instant::now() < deadline, "server did not start on {addr}");
        std::thread::sleep(Duration::from_millis(20));
    }
    Ok((server, addr))
}

/// Plain HTTP/1.0 GET; returns status code and body.
fn http_get(addr: SocketAddr, path: &str) -> Result<(u16, Vec<u8>), String> {
    let mut s = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    write!(s, "GET {path} HTTP/1.0\r\nHost: localhost\r\n\r\n").map_err(|e| e.to_string())?;
    let mut raw = Vec::new();
    s.read_to_end(&mut raw).map_err(|e| e.to_string())?;
    let split = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .ok_or("malformed response")?;
    let head = String::from_utf8_lossy(&raw[..split]);
    let status = head.split(' ').nth(1).and_then(|c| c.parse().ok()).ok_or("no status")?;
    Ok((status, raw[split + 4..].to_vec()))
}

const DETERMINISM_QUERIES: [&str; 7] = [
    "/api/entities",
    "/api/plot/performance?problem=corridor&attribute=time",
    "/api/plot/performance?problem=decoys&attribute=time&ecdf=true",
    "/api/plot/performance?problem=trivial&attribute=status",
    "/api/plot/progress?problem=decoys&show_points=true",
    "/api/plot/progress?problem=empty&version=1.1&smooth_window=3",
    "/api/plot/regression?problem=trivial&attribute=solution_length",
];

fn snapshot(addr: SocketAddr) -> Result<Vec<Vec<u8>>, String> {
    let mut out = Vec::new();
    for q in DETERMINISM_QUERIES {
        let variants = if q.starts_with("/api/plot") {
            vec![q.to_string(), format!("{q}&format=svg")]
        } else {
            vec![q.to_string()]
        };
        for path in variants {
            let (status, body) = http_get(addr, &path)?;
            check!(status == 200, "{path}: HTTP {status}");
            out.push(body);
        }
    }
    Ok(out)
}

fn server_determinism() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("fixtures.db");
    let logs: Vec<PathBuf> = std::fs::read_dir(repo_root().join("fixtures/logs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    let added = Command::new(env!("CARGO_BIN_EXE_plannerbench"))
        .args(["db", "add", "--db"])
        .arg(&db)
        .args(&logs)
        .stdout(Stdio::null())
        .status()
        .is_ok_and(|s| s.success());
    if !added {
        println!("FAIL server determinism: could not build the fixture db");
        return false;
    }

    criterion("server determinism", Duration::from_secs(5), || {
        let (server, addr) = start_server(&db)?;
        let first = snapshot(addr)?;
        drop(server);
        let (_server, addr) = start_server(&db)?;
        let second = snapshot(addr)?;
        check!(first.len() == second.len(), "response count changed");
        for (i, (a, b)) in first.iter().zip(&second).enumerate() {
            check!(a == b, "response {i} differs after restart");
        }
        let svgs = first.iter().filter(|b| b.starts_with(b"<svg")).count();
        let bytes: usize = first.iter().map(Vec::len).sum();
        Ok(format!(
            "{} responses ({svgs} SVG, {bytes} bytes) byte-identical across a restart",
            first.len()
        ))
    })
}

fn main() -> ExitCode {
    let default_hook = panic::take_hook();
    panic::set_hook(Box::new(move |info| {
        if info.payload().downcast_ref::<&str>() != Some(&"injected failure") {
            default_hook(info);
        }
    }));
    let criteria: [fn() -> bool; 8] = [
        log_round_trip,
        dynamic_schema,
        runner_containment,
        stats_oracles,
        bidirectional_trend,
        rrtstar_convergence,
        missing_data_accounting,
        server_determinism,
    ];
    let passed = criteria.iter().filter(|c| c()).count();
    println!("acceptance: {passed} of {} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
