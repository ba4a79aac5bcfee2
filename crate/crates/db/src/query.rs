use indexmap::IndexMap;
use plannerbench_core::props::TypeTag;
use rusqlite::types::Value as Sql;
use rusqlite::{params_from_iter, ToSql};
use serde::{Deserialize, Serialize};

use crate::ingest::property_types;
use crate::{near_misses, quote, DbError, ResultsDb, PROGRESS_TABLE, RUNS_TABLE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyInfo {
    pub name: String,
    #[serde(rename = "type")]
    pub tag: TypeTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Entities {
    pub problems: Vec<String>,
    pub planners: Vec<String>,
    pub versions: Vec<String>,
    pub run_attributes: Vec<PropertyInfo>,
    pub progress_attributes: Vec<PropertyInfo>,
}

/// Values of one run attribute per planner, one entry per matching run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSamples {
    pub attribute: String,
    #[serde(rename = "type")]
    pub tag: TypeTag,
    pub samples: IndexMap<String, Vec<Option<f64>>>,
}

/// Like [`AttributeSamples`], split by version (ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionSamples {
    pub attribute: String,
    #[serde(rename = "type")]
    pub tag: TypeTag,
    pub samples: IndexMap<String, Vec<(String, Vec<Option<f64>>)>>,
}

/// Per planner, one `(time, value)` series per run that has progress data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressSeries {
    pub attribute: String,
    pub series: IndexMap<String, Vec<Vec<(f64, Option<f64>)>>>,
}

fn numeric(v: Sql) -> Option<f64> {
    match v {
        Sql::Integer(i) => Some(i as f64),
        Sql::Real(r) => Some(r),
        _ => None,
    }
}

struct Selection {
    planners: Vec<String>,
}

impl ResultsDb {
    fn distinct(&self, sql: &str, args: &[&dyn ToSql]) -> Result<Vec<String>, DbError> {
        let mut stmt = self.conn.prepare(sql)?;
        let rows = stmt.query_map(args, |r| r.get::<_, Option<String>>(0))?;
        let mut out: Vec<String> = rows.collect::<Result<Vec<_>, _>>()?.into_iter().flatten().collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn property_list(&self, table: &str) -> Result<Vec<PropertyInfo>, DbError> {
        Ok(property_types(&self.conn, table)?
            .into_iter()
            .map(|(name, tag)| PropertyInfo { name, tag })
            .collect())
    }

    pub fn list_entities(&self) -> Result<Entities, DbError> {
        Ok(Entities {
            problems: self.distinct("SELECT DISTINCT name FROM experiments", &[])?,
            planners: self.distinct(
                "SELECT DISTINCT p.name FROM plannerConfigs p WHERE EXISTS (SELECT 1 FROM runs r WHERE r.plannerid = p.id)",
                &[],
            )?,
            versions: self.distinct("SELECT DISTINCT version FROM experiments", &[])?,
            run_attributes: self.property_list(RUNS_TABLE)?,
            progress_attributes: self.property_list(PROGRESS_TABLE)?,
        })
    }

    /// Versions present for one problem, ascending.
    pub fn problem_versions(&self, problem: &str) -> Result<Vec<String>, DbError> {
        self.distinct("SELECT DISTINCT version FROM experiments WHERE name = ?1", &[&problem])
    }

    /// Number of matching runs per selected planner.
    pub fn run_counts(
        &self,
        problem: &str,
        version: Option<&str>,
        planners: Option<&[String]>,
    ) -> Result<IndexMap<String, usize>, DbError> {
        let sel = self.select(problem, planners)?;
        let mut counts: IndexMap<String, usize> = sel.planners.iter().map(|p| (p.clone(), 0)).collect();
        let mut stmt = self.conn.prepare(
            "SELECT p.name, count(*) FROM runs r
             JOIN experiments e ON e.id = r.experimentid
             JOIN plannerConfigs p ON p.id = r.plannerid
             WHERE e.name = ?1 AND (?2 IS NULL OR e.version = ?2)
             GROUP BY p.name",
        )?;
        let mut rows = stmt.query(params_from_iter([Some(problem), version]))?;
        while let Some(row) = rows.next()? {
            let name: String = row.get(0)?;
            if let Some(c) = counts.get_mut(&name) {
                *c = row.get::<_, i64>(1)? as usize;
            }
        }
        Ok(counts)
    }

    /// Largest time limit among the problem's experiments (seconds).
    pub fn max_time_limit(&self, problem: &str, version: Option<&str>) -> Result<Option<f64>, DbError> {
        Ok(self.conn.query_row(
            "SELECT max(timelimit) FROM experiments WHERE name = ?1 AND (?2 IS NULL OR version = ?2)",
            params_from_iter([Some(problem), version]),
            |r| r.get(0),
        )?)
    }

    /// Checks the problem and the planner filter. Without a filter every
    /// planner with runs on the problem is selected, sorted by name.
    fn select(&self, problem: &str, planners: Option<&[String]>) -> Result<Selection, DbError> {
        let problems = self.distinct("SELECT DISTINCT name FROM experiments", &[])?;
        if !problems.iter().any(|p| p == problem) {
            return Err(DbError::UnknownProblem {
                name: problem.to_string(),
                available: problems,
            });
        }
        let available = self.distinct(
            "SELECT DISTINCT p.name FROM runs r
             JOIN experiments e ON e.id = r.experimentid
             JOIN plannerConfigs p ON p.id = r.plannerid
             WHERE e.name = ?1",
            &[&problem],
        )?;
        let planners = match planners {
            None => available,
            Some(wanted) => {
                let mut out: Vec<String> = Vec::new();
                for w in wanted {
                    if !available.contains(w) {
                        return Err(DbError::UnknownPlanner {
                            name: w.clone(),
                            suggestions: near_misses(w, &available),
                            available,
                        });
                    }
                    if !out.contains(w) {
                        out.push(w.clone());
                    }
                }
                out
            }
        };
        Ok(Selection { planners })
    }

    fn attribute(&self, table: &str, attribute: &str) -> Result<(String, TypeTag), DbError> {
        let known = property_types(&self.conn, table)?;
        match known.iter().find(|(n, _)| n.as_str() == attribute) {
            Some((n, t)) => Ok((n.clone(), *t)),
            None => {
                let available: Vec<String> = known.keys().cloned().collect();
                Err(DbError::UnknownAttribute {
                    name: attribute.to_string(),
                    suggestions: near_misses(attribute, &available),
                    available,
                })
            }
        }
    }

    fn numeric_attribute(&self, table: &str, attribute: &str) -> Result<(String, TypeTag), DbError> {
        let (name, tag) = self.attribute(table, attribute)?;
        if !tag.is_numeric() {
            return Err(DbError::NotNumeric(name));
        }
        Ok((name, tag))
    }

    /// Every matching run's value of a run attribute, per planner, in
    /// run order. `version = None` selects all versions.
    pub fn query_attribute(
        &self,
        problem: &str,
        attribute: &str,
        version: Option<&str>,
        planners: Option<&[String]>,
    ) -> Result<AttributeSamples, DbError> {
        let sel = self.select(problem, planners)?;
        let (column, tag) = self.numeric_attribute(RUNS_TABLE, attribute)?;
        let mut samples: IndexMap<String, Vec<Option<f64>>> =
            sel.planners.iter().map(|p| (p.clone(), Vec::new())).collect();
        let sql = format!(
            "SELECT p.name, r.{} FROM runs r
             JOIN experiments e ON e.id = r.experimentid
             JOIN plannerConfigs p ON p.id = r.plannerid
             WHERE e.name = ?1 AND (?2 IS NULL OR e.version = ?2)
             ORDER BY r.id",
            quote(&column)
        );
        let mut stmt = self.conn.prepare(&sql)?;
        let mut rows = stmt.query(params_from_iter([Some(problem), version]))?;
        while let Some(row) = rows.next()? {
            let name: String = row.get(0)?;
            if let Some(list) = samples.get_mut(&name) {
                list.push(numeric(row.get(1)?));
            }
        }
        Ok(AttributeSamples {
            attribute: column,
            tag,
            samples,
        })
    }

    /// Attribute values per planner grouped by version. Versions in which a
    /// planner has no runs are omitted for that planner.
    pub fn query_attribute_by_version(
        &self,
        problem: &str,
        attribute: &str,
        planners: Option<&[String]>,
    ) -> Result<VersionSamples, DbError> {
        let sel = self.select(problem, planners)?;
        let (column, tag) = self.numeric_attribute(RUNS_TABLE, attribute)?;
        let mut grouped: IndexMap<String, IndexMap<String, Vec<Option<f64>>>> =
            sel.planners.iter().map(|p| (p.clone(), IndexMap::new())).collect();
        let sql = format!(
            "SELECT p.name, e.version, r.{} FROM runs r
             JOIN experiments e ON e.id = r.experimentid
             JOIN plannerConfigs p ON p.id = r.plannerid
             WHERE e.name = ?1
             ORDER BY r.id",
            quote(&column)
        );
        let mut stmt = self.conn.prepare(&sql)?;
        let mut rows = stmt.query([problem])?;
        while let Some(row) = rows.next()? {
            let name: String = row.get(0)?;
            let version: String = row.get::<_, Option<String>>(1)?.unwrap_or_default();
            if let Some(by_version) = grouped.get_mut(&name) {
                by_version.entry(version).or_default().push(numeric(row.get(2)?));
            }
        }
        let samples = grouped
            .into_iter()
            .map(|(planner, mut by_version)| {
                by_version.sort_keys();
                (planner, by_version.into_iter().collect())
            })
            .collect();
        Ok(VersionSamples {
            attribute: column,
            tag,
            samples,
        })
    }

    /// Progress streams of `attribute` against the `time` progress column.
    /// Runs without progress data contribute no series.
    pub fn query_progress(
        &self,
        problem: &str,
        attribute: &str,
        version: Option<&str>,
        planners: Option<&[String]>,
    ) -> Result<ProgressSeries, DbError> {
        let sel = self.select(problem, planners)?;
        let mut series: IndexMap<String, Vec<Vec<(f64, Option<f64>)>>> =
            sel.planners.iter().map(|p| (p.clone(), Vec::new())).collect();
        let known = property_types(&self.conn, PROGRESS_TABLE)?;
        if known.is_empty() {
            return Ok(ProgressSeries {
                attribute: attribute.to_string(),
                series,
            });
        }
        let (column, _) = self.numeric_attribute(PROGRESS_TABLE, attribute)?;
        let (time, _) = self.numeric_attribute(PROGRESS_TABLE, "time")?;
        let sql = format!(
            "SELECT p.name, g.runid, g.{}, g.{} FROM progress g
             JOIN runs r ON r.id = g.runid
             JOIN experiments e ON e.id = r.experimentid
             JOIN plannerConfigs p ON p.id = r.plannerid
             WHERE e.name = ?1 AND (?2 IS NULL OR e.version = ?2)
             ORDER BY g.runid, g.rowid",
            quote(&time),
            quote(&column)
        );
        let mut stmt = self.conn.prepare(&sql)?;
        let mut rows = stmt.query(params_from_iter([Some(problem), version]))?;
        let mut current: Option<(String, i64, Vec<(f64, Option<f64>)>)> = None;
        let mut flush = |cur: Option<(String, i64, Vec<(f64, Option<f64>)>)>| {
            if let Some((name, _, mut s)) = cur {
                s.sort_by(|a, b| a.0.total_cmp(&b.0));
                if let Some(list) = series.get_mut(&name) {
                    list.push(s);
                }
            }
        };
        while let Some(row) = rows.next()? {
            let name: String = row.get(0)?;
            let run: i64 = row.get(1)?;
            let Some(t) = numeric(row.get(2)?) else { continue };
            let v = numeric(row.get(3)?);
            match &mut current {
                Some((_, r, s)) if *r == run => s.push((t, v)),
                _ => {
                    flush(current.take());
                    current = Some((name, run, vec![(t, v)]));
                }
            }
        }
        flush(current);
        Ok(ProgressSeries {
            attribute: column,
            series,
        })
    }
}
