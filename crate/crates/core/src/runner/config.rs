use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;

use super::{BenchmarkSpec, RunnerError, SavePaths};
use crate::geometry::{
    Objective, ProblemDef, Robot, SpaceKind, State, StateSpace, World, BUNDLED_WORLDS, DEFAULT_ROTATION_WEIGHT,
};
use crate::planners::PlannerSpec;

pub const DEFAULT_MEMORY_LIMIT_MB: f64 = 4096.0;
pub const DEFAULT_PROGRESS_INTERVAL: f64 = 0.1;

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: IndexMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.shift_remove(key)
    }
}

fn syntax(line: usize, message: impl Into<String>) -> RunnerError {
    RunnerError::Config {
        line,
        message: message.into(),
    }
}

fn required(sec: &mut Section, section: &str, key: &str) -> Result<(usize, String), RunnerError> {
    sec.take(key).ok_or_else(|| RunnerError::MissingKey {
        section: section.to_string(),
        key: key.to_string(),
    })
}

fn number<T: std::str::FromStr>(line: usize, key: &str, text: &str) -> Result<T, RunnerError> {
    text.parse()
        .map_err(|_| syntax(line, format!("{key}: cannot parse {text:?}")))
}

fn parse_state(line: usize, key: &str, text: &str, kind: SpaceKind) -> Result<State, RunnerError> {
    let nums: Vec<f64> = text
        .split_whitespace()
        .map(|w| number(line, key, w))
        .collect::<Result<_, _>>()?;
    match (kind, nums.as_slice()) {
        (SpaceKind::R2, [x, y]) => Ok(State::point(*x, *y)),
        (SpaceKind::SE2 | SpaceKind::Car1, [x, y, t]) => Ok(State::new(*x, *y, *t)),
        (SpaceKind::SE2 | SpaceKind::Car1, [x, y]) => Ok(State::new(*x, *y, 0.0)),
        _ => Err(syntax(
            line,
            format!("{key}: expected 'x y' for R2 or 'x y theta' for SE2/CAR1, got {text:?}"),
        )),
    }
}

/// A bare bundled world name, or a file path relative to `base`.
fn resolve_world(line: usize, value: &str, base: &Path) -> Result<(World, String), RunnerError> {
    let looks_like_path = value.contains('/') || value.contains('.');
    if !looks_like_path && BUNDLED_WORLDS.contains(&value) {
        return Ok((
            World::bundled(value).map_err(|e| syntax(line, e.to_string()))?,
            value.to_string(),
        ));
    }
    let path: PathBuf = base.join(value);
    let world = World::load(&path).map_err(|e| RunnerError::World {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| value.to_string());
    Ok((world, name))
}

/// Parses a benchmark configuration. Relative world paths are resolved
/// against `base_dir`.
///
/// ```text
/// [problem]
/// world = corridor
/// space = R2
/// start = 1 1.5
/// goal = 1 14.5
///
/// [benchmark]
/// time_limit = 5
/// run_count = 50
///
/// [planner:rrt]
/// type = RRT
/// range = 0.5
/// ```
pub fn parse_config(text: &str, base_dir: &Path) -> Result<BenchmarkSpec, RunnerError> {
    let mut problem: Option<Section> = None;
    let mut bench: Option<Section> = None;
    let mut planners: Vec<(String, Section)> = Vec::new();
    let mut current: Option<&mut Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, "unterminated section header"))?
                .trim();
            let fresh = Section {
                line,
                ..Section::default()
            };
            current = Some(match header {
                "problem" => {
                    if problem.is_some() {
                        return Err(syntax(line, "duplicate [problem] section"));
                    }
                    problem.insert(fresh)
                }
                "benchmark" => {
                    if bench.is_some() {
                        return Err(syntax(line, "duplicate [benchmark] section"));
                    }
                    bench.insert(fresh)
                }
                h => {
                    let name = h
                        .strip_prefix("planner:")
                        .map(str::trim)
                        .ok_or_else(|| syntax(line, format!("unknown section [{h}]")))?;
                    if name.is_empty() {
                        return Err(syntax(line, "planner section without an instance name"));
                    }
                    if planners.iter().any(|(n, _)| n == name) {
                        return Err(RunnerError::DuplicateInstance(name.to_string()));
                    }
                    planners.push((name.to_string(), fresh));
                    &mut planners.last_mut().expect("just pushed").1
                }
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected 'key = value', got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(syntax(line, "empty key"));
        }
        let sec = current
            .as_deref_mut()
            .ok_or_else(|| syntax(line, "key outside of any section"))?;
        if sec.entries.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(syntax(line, format!("duplicate key {key:?}")));
        }
    }

    let mut p = problem.ok_or_else(|| RunnerError::MissingSection("problem".into()))?;
    let mut b = bench.ok_or_else(|| RunnerError::MissingSection("benchmark".into()))?;

    let (wl, world_ref) = required(&mut p, "problem", "world")?;
    let (world, world_name) = resolve_world(wl, &world_ref, base_dir)?;
    let (sl, space_text) = required(&mut p, "problem", "space")?;
    let kind: SpaceKind = space_text
        .parse()
        .map_err(|e: crate::geometry::GeometryError| syntax(sl, e.to_string()))?;
    let (l, start_text) = required(&mut p, "problem", "start")?;
    let start = parse_state(l, "start", &start_text, kind)?;
    let (l, goal_text) = required(&mut p, "problem", "goal")?;
    let goal = parse_state(l, "goal", &goal_text, kind)?;
    let name = p.take("name").map(|(_, v)| v).unwrap_or_else(|| world_name.clone());

    let mut space = StateSpace::new(kind, world.bounds);
    space.rotation_weight = match p.take("rotation_weight") {
        Some((l, v)) => number(l, "rotation_weight", &v)?,
        None => DEFAULT_ROTATION_WEIGHT,
    };
    let mut builder = ProblemDef::builder(name.clone(), space, world, start, goal);
    let mut properties = IndexMap::new();
    properties.insert("world".to_string(), world_ref.clone());
    properties.insert("space".to_string(), kind.to_string());
    if let Some((l, v)) = p.take("robot") {
        let robot = Robot::parse(&v).map_err(|e| syntax(l, e.to_string()))?;
        builder = builder.robot(robot);
    }
    if let Some((l, v)) = p.take("goal_tolerance") {
        builder = builder.goal_tolerance(number(l, "goal_tolerance", &v)?);
    }
    if let Some((l, v)) = p.take("collision_resolution") {
        builder = builder.collision_resolution(number(l, "collision_resolution", &v)?);
    }
    let objective = match p.take("objective") {
        Some((l, v)) => v
            .parse()
            .map_err(|e: crate::geometry::GeometryError| syntax(l, e.to_string()))?,
        None => Objective::Length,
    };
    let threshold = match p.take("objective_threshold") {
        Some((l, v)) => {
            let t: f64 = number(l, "objective_threshold", &v)?;
            if !(t >= 0.0) {
                return Err(syntax(l, "objective_threshold must be nonnegative"));
            }
            t
        }
        None => f64::INFINITY,
    };
    builder = builder.objective(objective, threshold);
    if let Some((key, (l, _))) = p.entries.first() {
        return Err(syntax(*l, format!("unknown [problem] key {key:?}")));
    }
    let problem = builder.build().map_err(|e| syntax(p.line, e.to_string()))?;
    properties.insert("robot".to_string(), problem.robot.describe());
    properties.insert("start".to_string(), state_text(&problem.start, kind));
    properties.insert("goal".to_string(), state_text(&problem.goal, kind));
    properties.insert("goal_tolerance".to_string(), problem.goal_tolerance.to_string());
    properties.insert(
        "collision_resolution".to_string(),
        problem.collision_resolution.to_string(),
    );
    properties.insert("objective".to_string(), problem.objective.to_string());
    properties.insert(
        "objective_threshold".to_string(),
        problem.objective_threshold.to_string(),
    );

    let (l, v) = required(&mut b, "benchmark", "time_limit")?;
    let time_limit: f64 = number(l, "time_limit", &v)?;
    if !(time_limit > 0.0 && time_limit.is_finite()) {
        return Err(syntax(l, "time_limit must be positive"));
    }
    let (l, v) = required(&mut b, "benchmark", "run_count")?;
    let run_count: u64 = number(l, "run_count", &v)?;
    if run_count == 0 {
        return Err(syntax(l, "run_count must be at least 1"));
    }
    let memory_limit_mb: f64 = match b.take("memory_limit") {
        Some((l, v)) => number(l, "memory_limit", &v)?,
        None => DEFAULT_MEMORY_LIMIT_MB,
    };
    let seed: u64 = match b.take("seed") {
        Some((l, v)) => number(l, "seed", &v)?,
        None => 0,
    };
    let save_paths = match b.take("save_paths") {
        Some((l, v)) => v.parse().map_err(|e: String| syntax(l, e))?,
        None => SavePaths::None,
    };
    let progress_interval: f64 = match b.take("progress_interval") {
        Some((l, v)) => {
            let i: f64 = number(l, "progress_interval", &v)?;
            if !(i > 0.0) {
                return Err(syntax(l, "progress_interval must be positive"));
            }
            i
        }
        None => DEFAULT_PROGRESS_INTERVAL,
    };
    if let Some((key, (l, _))) = b.entries.first() {
        return Err(syntax(*l, format!("unknown [benchmark] key {key:?}")));
    }

    let mut specs = Vec::with_capacity(planners.len());
    for (instance, mut sec) in planners {
        let (_, ty) = sec.take("type").ok_or_else(|| RunnerError::MissingKey {
            section: format!("planner:{instance}"),
            key: "type".into(),
        })?;
        let mut spec = PlannerSpec::new(instance, ty);
        for (k, (_, v)) in sec.entries {
            spec.params.insert(k, v);
        }
        specs.push(spec);
    }
    if specs.is_empty() {
        return Err(RunnerError::MissingSection("planner:<instance>".into()));
    }

    Ok(BenchmarkSpec {
        name,
        problem: Arc::new(problem),
        problem_properties: properties,
        planners: specs,
        time_limit,
        memory_limit_mb,
        run_count,
        seed,
        save_paths,
        progress_interval,
    })
}

pub fn load_config(path: &Path) -> Result<BenchmarkSpec, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunnerError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

fn state_text(s: &State, kind: SpaceKind) -> String {
    if kind.has_rotation() {
        format!("{} {} {}", s.x, s.y, s.theta)
    } else {
        format!("{} {}", s.x, s.y)
    }
}
