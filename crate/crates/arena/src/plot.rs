//! Plot payloads built from database queries. The SVG renderer draws
//! exactly these structures.

use plannerbench_core::benchlog::RunStatus;
use plannerbench_core::props::TypeTag;
use plannerbench_core::stats::{
    boxplot_stats, ecdf, missing_counts, progress_aggregate, regression_aggregate, success_fraction, wilson_interval,
    BoxStats, EcdfPoint, MissingRow, ProgressAggregate, RegressionBar, SuccessFraction, DEFAULT_GRID_STEP,
    DEFAULT_SMOOTH_WINDOW, Z_95,
};
use plannerbench_db::{DbError, ResultsDb};
use serde::{Deserialize, Serialize};

pub const ALL_VERSIONS: &str = "ALL";
pub const DEFAULT_ATTRIBUTE: &str = "time";
pub const DEFAULT_PROGRESS_ATTRIBUTE: &str = "best_cost";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Performance,
    Progress,
    Regression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub ecdf: bool,
    pub show_points: bool,
    pub smooth_window: usize,
    pub grid_step: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            ecdf: false,
            show_points: false,
            smooth_window: DEFAULT_SMOOTH_WINDOW,
            grid_step: DEFAULT_GRID_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotQuery {
    pub kind: PlotKind,
    pub problem: String,
    pub attribute: String,
    /// `None` selects every version.
    pub version: Option<String>,
    /// `None` selects every planner of the problem.
    pub planners: Option<Vec<String>>,
    pub options: PlotOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerformanceMode {
    Boxplot,
    Ecdf,
    Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceEntry {
    pub name: String,
    #[serde(rename = "box")]
    pub box_stats: Option<BoxStats>,
    pub ecdf: Option<Vec<EcdfPoint>>,
    pub fraction: Option<SuccessFraction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformancePlot {
    pub problem: String,
    pub attribute: String,
    pub attribute_type: TypeTag,
    pub version: String,
    pub mode: PerformanceMode,
    pub planners: Vec<PerformanceEntry>,
    pub missing: Vec<MissingRow>,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressEntry {
    pub name: String,
    /// Runs with a progress stream.
    pub runs: usize,
    pub aggregate: ProgressAggregate,
    /// Raw `[t, value]` measurements, when requested.
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressPlot {
    pub problem: String,
    pub attribute: String,
    pub version: String,
    pub time_limit: f64,
    pub grid_step: f64,
    pub smooth_window: usize,
    pub planners: Vec<ProgressEntry>,
    pub missing: Vec<MissingRow>,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionEntry {
    pub name: String,
    pub bars: Vec<RegressionBar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionPlot {
    pub problem: String,
    pub attribute: String,
    pub attribute_type: TypeTag,
    pub versions: Vec<String>,
    pub planners: Vec<RegressionEntry>,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlotData {
    Performance(PerformancePlot),
    Progress(ProgressPlot),
    Regression(RegressionPlot),
}

fn unit(attribute: &str) -> &'static str {
    match attribute {
        "time" | "simplification_time" => " (s)",
        "memory" => " (bytes)",
        _ => "",
    }
}

/// JSON has no infinities, so non-finite values are treated as absent.
fn finite(v: Vec<Option<f64>>) -> Vec<Option<f64>> {
    v.into_iter().map(|x| x.filter(|x| x.is_finite())).collect()
}

fn version_label(v: &Option<String>) -> String {
    v.clone().unwrap_or_else(|| ALL_VERSIONS.to_string())
}

pub fn build_plot(db: &ResultsDb, q: &PlotQuery) -> Result<PlotData, DbError> {
    match q.kind {
        PlotKind::Performance => performance(db, q).map(PlotData::Performance),
        PlotKind::Progress => progress(db, q).map(PlotData::Progress),
        PlotKind::Regression => regression(db, q).map(PlotData::Regression),
    }
}

fn fraction_of(values: &[Option<f64>], tag: TypeTag, attribute: &str) -> Option<SuccessFraction> {
    if values.is_empty() {
        return None;
    }
    if attribute == "status" {
        let statuses: Vec<Option<RunStatus>> = values
            .iter()
            .map(|v| v.and_then(|c| RunStatus::from_code(c as i64)))
            .collect();
        return success_fraction(&statuses);
    }
    debug_assert_eq!(tag, TypeTag::Boolean);
    let k = values.iter().filter(|v| **v == Some(1.0)).count();
    let n = values.len();
    let (low, high) = wilson_interval(k, n, Z_95);
    Some(SuccessFraction {
        successes: k,
        n,
        fraction: k as f64 / n as f64,
        low,
        high,
    })
}

fn performance(db: &ResultsDb, q: &PlotQuery) -> Result<PerformancePlot, DbError> {
    let planners = q.planners.as_deref();
    let version = q.version.as_deref();
    let samples = db.query_attribute(&q.problem, &q.attribute, version, planners)?;
    let mode = if q.attribute == "status" || samples.tag == TypeTag::Boolean {
        PerformanceMode::Fraction
    } else if q.options.ecdf {
        PerformanceMode::Ecdf
    } else {
        PerformanceMode::Boxplot
    };
    // the ECDF of solve time counts only exact solutions as solved
    let status = if mode == PerformanceMode::Ecdf && q.attribute == "time" {
        db.query_attribute(&q.problem, "status", version, planners).ok()
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (name, raw) in &samples.samples {
        let values = finite(raw.clone());
        rows.push((name.clone(), values.clone()));
        let entry = match mode {
            PerformanceMode::Boxplot => PerformanceEntry {
                name: name.clone(),
                box_stats: Some(boxplot_stats(&values)),
                ecdf: None,
                fraction: None,
            },
            PerformanceMode::Ecdf => {
                let masked: Vec<Option<f64>> = match status.as_ref().map(|s| &s.samples[name]) {
                    Some(st) => values
                        .iter()
                        .zip(st)
                        .map(|(v, s)| v.filter(|_| *s == Some(RunStatus::ExactSolution.code() as f64)))
                        .collect(),
                    None => values.clone(),
                };
                PerformanceEntry {
                    name: name.clone(),
                    box_stats: None,
                    ecdf: Some(ecdf(&masked).unwrap_or_default()),
                    fraction: None,
                }
            }
            PerformanceMode::Fraction => PerformanceEntry {
                name: name.clone(),
                box_stats: None,
                ecdf: None,
                fraction: fraction_of(&values, samples.tag, &q.attribute),
            },
        };
        entries.push(entry);
    }
    let (x_label, y_label) = match mode {
        PerformanceMode::Ecdf => (
            format!("{}{}", q.attribute, unit(&q.attribute)),
            "fraction of runs".to_string(),
        ),
        PerformanceMode::Fraction => (
            "planner".to_string(),
            format!("fraction {}", fraction_label(&q.attribute)),
        ),
        PerformanceMode::Boxplot => ("planner".to_string(), format!("{}{}", q.attribute, unit(&q.attribute))),
    };
    Ok(PerformancePlot {
        problem: q.problem.clone(),
        attribute: samples.attribute,
        attribute_type: samples.tag,
        version: version_label(&q.version),
        mode,
        planners: entries,
        missing: missing_counts(&rows),
        x_label,
        y_label,
    })
}

fn fraction_label(attribute: &str) -> String {
    if attribute == "status" {
        "solved exactly".into()
    } else {
        format!("{attribute} true")
    }
}

fn progress(db: &ResultsDb, q: &PlotQuery) -> Result<ProgressPlot, DbError> {
    let planners = q.planners.as_deref();
    let version = q.version.as_deref();
    let series = db.query_progress(&q.problem, &q.attribute, version, planners)?;
    let counts = db.run_counts(&q.problem, version, planners)?;
    let time_limit = db
        .max_time_limit(&q.problem, version)?
        .filter(|t| *t > 0.0 && t.is_finite())
        .unwrap_or(1.0);
    let mut entries = Vec::new();
    let mut missing = Vec::new();
    for (name, runs) in &series.series {
        let runs: Vec<Vec<(f64, Option<f64>)>> = runs
            .iter()
            .map(|s| {
                s.iter()
                    .filter(|(t, _)| t.is_finite())
                    .map(|(t, v)| (*t, v.filter(|v| v.is_finite())))
                    .collect()
            })
            .collect();
        let aggregate = progress_aggregate(&runs, time_limit, q.options.grid_step, q.options.smooth_window)
            .expect("options validated by the caller");
        let points = q.options.show_points.then(|| {
            runs.iter()
                .flat_map(|s| s.iter().filter_map(|(t, v)| v.map(|v| [*t, v])))
                .collect()
        });
        let with_data = runs.iter().filter(|s| s.iter().any(|(_, v)| v.is_some())).count();
        let total = counts.get(name).copied().unwrap_or(0);
        missing.push(MissingRow {
            planner: name.clone(),
            n_total: total,
            n_missing: total.saturating_sub(with_data),
        });
        entries.push(ProgressEntry {
            name: name.clone(),
            runs: runs.len(),
            aggregate,
            points,
        });
    }
    Ok(ProgressPlot {
        problem: q.problem.clone(),
        attribute: series.attribute.clone(),
        version: version_label(&q.version),
        time_limit,
        grid_step: q.options.grid_step,
        smooth_window: q.options.smooth_window,
        planners: entries,
        missing,
        x_label: "time (s)".into(),
        y_label: series.attribute,
    })
}

fn regression(db: &ResultsDb, q: &PlotQuery) -> Result<RegressionPlot, DbError> {
    let samples = db.query_attribute_by_version(&q.problem, &q.attribute, q.planners.as_deref())?;
    let planners = samples
        .samples
        .iter()
        .map(|(name, groups)| {
            let groups: Vec<(String, Vec<Option<f64>>)> =
                groups.iter().map(|(v, s)| (v.clone(), finite(s.clone()))).collect();
            RegressionEntry {
                name: name.clone(),
                bars: regression_aggregate(&groups),
            }
        })
        .collect();
    Ok(RegressionPlot {
        problem: q.problem.clone(),
        attribute: samples.attribute.clone(),
        attribute_type: samples.tag,
        versions: db.problem_versions(&q.problem)?,
        planners,
        x_label: "version".into(),
        y_label: format!("{}{}", samples.attribute, unit(&samples.attribute)),
    })
}
