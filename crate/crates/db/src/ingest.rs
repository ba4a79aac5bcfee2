use std::collections::HashMap;

use indexmap::IndexMap;
use plannerbench_core::benchlog::{ExperimentLog, PlannerBlock, PropertyDecl, RunStatus};
use plannerbench_core::props::{TypeTag, Value};
use rusqlite::types::ToSqlOutput;
use rusqlite::{params, params_from_iter, Connection, OptionalExtension, Transaction};

use crate::{quote, DbError, ResultsDb, PROGRESS_FIXED, PROGRESS_TABLE, RUNS_FIXED, RUNS_TABLE};

/// Canonical settings text: `k=v` pairs sorted by key, joined by `, `.
pub fn settings_string(settings: &IndexMap<String, String>) -> String {
    let mut pairs: Vec<(&String, &String)> = settings.iter().collect();
    pairs.sort();
    pairs
        .into_iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn ensure_status_enums(conn: &Connection) -> Result<(), DbError> {
    let mut stmt = conn.prepare("INSERT OR IGNORE INTO enums (name, value, description) VALUES ('status', ?1, ?2)")?;
    for s in RunStatus::ALL {
        stmt.execute(params![s.code(), s.label()])?;
    }
    Ok(())
}

fn sql_type(tag: TypeTag) -> &'static str {
    match tag {
        TypeTag::Integer | TypeTag::Enum | TypeTag::Boolean => "INTEGER",
        TypeTag::Real => "REAL",
        TypeTag::String => "TEXT",
    }
}

/// Column type after ingesting `incoming` values into an `existing` column.
fn merge_types(property: &str, existing: TypeTag, incoming: TypeTag) -> Result<TypeTag, DbError> {
    if existing == incoming {
        return Ok(existing);
    }
    if existing == TypeTag::String || incoming == TypeTag::String {
        return Err(DbError::TypeClash {
            property: property.to_string(),
            existing,
            incoming,
        });
    }
    if existing == TypeTag::Real || incoming == TypeTag::Real {
        Ok(TypeTag::Real)
    } else {
        Ok(TypeTag::Integer)
    }
}

pub(crate) fn property_types(conn: &Connection, table: &str) -> Result<IndexMap<String, TypeTag>, DbError> {
    let mut stmt = conn.prepare("SELECT name, type FROM propertyTypes WHERE tablename = ?1 ORDER BY rowid")?;
    let rows = stmt.query_map([table], |r| Ok((r.get::<_, String>(0)?, r.get::<_, String>(1)?)))?;
    let mut out = IndexMap::new();
    for row in rows {
        let (name, tag) = row?;
        let tag = tag
            .parse::<TypeTag>()
            .map_err(|e| DbError::Corrupt(format!("propertyTypes row {name}: {e}")))?;
        out.insert(name, tag);
    }
    Ok(out)
}

/// Makes every declared property a column of `table` and returns the
/// stored column name for each declaration, in order.
fn ensure_columns(
    tx: &Transaction<'_>,
    table: &str,
    planner: &str,
    decls: &[PropertyDecl],
) -> Result<Vec<String>, DbError> {
    let fixed: &[&str] = if table == RUNS_TABLE {
        &RUNS_FIXED
    } else {
        &PROGRESS_FIXED
    };
    let known = property_types(tx, table)?;
    let by_lower: HashMap<String, (String, TypeTag)> = known
        .iter()
        .map(|(n, t)| (n.to_ascii_lowercase(), (n.clone(), *t)))
        .collect();
    let mut seen = Vec::new();
    let mut names = Vec::with_capacity(decls.len());
    for d in decls {
        let lower = d.name.to_ascii_lowercase();
        if fixed.contains(&lower.as_str()) {
            return Err(DbError::ReservedName(d.name.clone()));
        }
        if seen.contains(&lower) {
            return Err(DbError::DuplicateColumn {
                planner: planner.to_string(),
                name: d.name.clone(),
            });
        }
        seen.push(lower.clone());
        match by_lower.get(&lower) {
            Some((stored, existing)) => {
                let merged = merge_types(stored, *existing, d.tag)?;
                if merged != *existing {
                    tx.execute(
                        "UPDATE propertyTypes SET type = ?1 WHERE tablename = ?2 AND name = ?3",
                        params![merged.as_str(), table, stored],
                    )?;
                }
                names.push(stored.clone());
            }
            None => {
                tx.execute_batch(&format!(
                    "ALTER TABLE {} ADD COLUMN {} {}",
                    quote(table),
                    quote(&d.name),
                    sql_type(d.tag)
                ))?;
                tx.execute(
                    "INSERT INTO propertyTypes (tablename, name, type) VALUES (?1, ?2, ?3)",
                    params![table, d.name, d.tag.as_str()],
                )?;
                names.push(d.name.clone());
            }
        }
    }
    Ok(names)
}

fn to_sql(v: &Option<Value>) -> ToSqlOutput<'_> {
    use rusqlite::types::Value as Sql;
    ToSqlOutput::Owned(match v {
        None => Sql::Null,
        Some(Value::Integer(i)) | Some(Value::Enum(i)) => Sql::Integer(*i),
        Some(Value::Boolean(b)) => Sql::Integer(*b as i64),
        Some(Value::Real(r)) => Sql::Real(*r),
        Some(Value::String(s)) => Sql::Text(s.clone()),
    })
}

fn planner_config_id(tx: &Transaction<'_>, block: &PlannerBlock) -> Result<i64, DbError> {
    let settings = settings_string(&block.settings);
    let existing: Option<i64> = tx
        .query_row(
            "SELECT id FROM plannerConfigs WHERE name = ?1 AND settings = ?2",
            params![block.name, settings],
            |r| r.get(0),
        )
        .optional()?;
    if let Some(id) = existing {
        return Ok(id);
    }
    tx.execute(
        "INSERT INTO plannerConfigs (name, settings) VALUES (?1, ?2)",
        params![block.name, settings],
    )?;
    Ok(tx.last_insert_rowid())
}

fn insert_sql(table: &str, lead: &[&str], cols: &[String]) -> String {
    let all: Vec<String> = lead
        .iter()
        .map(|c| quote(c))
        .chain(cols.iter().map(|c| quote(c)))
        .collect();
    let marks = vec!["?"; all.len()].join(", ");
    format!("INSERT INTO {} ({}) VALUES ({marks})", quote(table), all.join(", "))
}

impl ResultsDb {
    /// Adds one log; all or nothing. Returns the new experiment id.
    pub fn ingest_log(&mut self, log: &ExperimentLog) -> Result<i64, DbError> {
        log.validate()?;
        let tx = self.conn.transaction()?;
        tx.execute(
            "INSERT INTO experiments (name, totaltime, timelimit, memorylimit, runcount, version, hostname, cpuinfo, date, seed)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)",
            params![
                log.name,
                log.total_time,
                log.time_limit,
                log.memory_limit_mb,
                log.run_count as i64,
                log.version,
                log.hostname,
                log.cpuinfo,
                log.date,
                log.seed as i64,
            ],
        )?;
        let experiment = tx.last_insert_rowid();
        for (k, v) in &log.problem_properties {
            tx.execute(
                "INSERT INTO experimentProperties (experimentid, name, value) VALUES (?1, ?2, ?3)",
                params![experiment, k, v],
            )?;
        }
        for block in &log.planners {
            let run_cols = ensure_columns(&tx, RUNS_TABLE, &block.name, &block.run_schema)?;
            let progress_cols = ensure_columns(&tx, PROGRESS_TABLE, &block.name, &block.progress_schema)?;
            let planner = planner_config_id(&tx, block)?;
            let mut run_stmt = tx.prepare(&insert_sql(RUNS_TABLE, &["experimentid", "plannerid"], &run_cols))?;
            let mut progress_stmt = tx.prepare(&insert_sql(PROGRESS_TABLE, &["runid"], &progress_cols))?;
            for run in &block.runs {
                let lead = [ToSqlOutput::from(experiment), ToSqlOutput::from(planner)];
                run_stmt.execute(params_from_iter(lead.into_iter().chain(run.values.iter().map(to_sql))))?;
                let run_id = tx.last_insert_rowid();
                for tuple in &run.progress {
                    let lead = [ToSqlOutput::from(run_id)];
                    progress_stmt.execute(params_from_iter(lead.into_iter().chain(tuple.iter().map(to_sql))))?;
                }
            }
        }
        tx.commit()?;
        Ok(experiment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_are_sorted() {
        let mut s = IndexMap::new();
        s.insert("type".to_string(), "RRT".to_string());
        s.insert("range".to_string(), "0.5".to_string());
        s.insert("goal_bias".to_string(), "0.05".to_string());
        assert_eq!(settings_string(&s), "goal_bias=0.05, range=0.5, type=RRT");
        assert_eq!(settings_string(&IndexMap::new()), "");
    }

    #[test]
    fn type_merging() {
        use TypeTag::*;
        assert_eq!(merge_types("a", Integer, Real).unwrap(), Real);
        assert_eq!(merge_types("a", Real, Integer).unwrap(), Real);
        assert_eq!(merge_types("a", Enum, Boolean).unwrap(), Integer);
        assert_eq!(merge_types("a", Enum, Enum).unwrap(), Enum);
        let err = merge_types("label", String, Real).unwrap_err();
        assert!(err.to_string().contains("label"), "{err}");
        assert!(merge_types("a", Integer, String).is_err());
    }
}
