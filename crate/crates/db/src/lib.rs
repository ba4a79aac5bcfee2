//! Results database: a single SQLite file holding any number of ingested
//! benchmark logs.
//!
//! Tables:
//!
//! - `experiments`: one row per log header.
//! - `experimentProperties`: the problem description lines of each log.
//! - `plannerConfigs`: one row per distinct (planner name, settings string).
//! - `runs`: one row per run; a column per run property ever seen.
//! - `progress`: one row per progress sample; a column per progress property.
//! - `enums`: labels of enumerated values (run status).
//! - `propertyTypes`: the declared type tag of every dynamic column.

mod ingest;
mod query;

use std::path::Path;

use plannerbench_core::benchlog::LogError;
use plannerbench_core::props::TypeTag;
use rusqlite::{Connection, OptionalExtension};
use thiserror::Error;

pub use ingest::settings_string;
pub use query::{AttributeSamples, Entities, ProgressSeries, PropertyInfo, VersionSamples};

pub const RUNS_TABLE: &str = "runs";
pub const PROGRESS_TABLE: &str = "progress";

/// Fixed columns of the dynamic tables.
pub(crate) const RUNS_FIXED: [&str; 3] = ["id", "experimentid", "plannerid"];
pub(crate) const PROGRESS_FIXED: [&str; 1] = ["runid"];

#[derive(Debug, Error)]
pub enum DbError {
    #[error("database: {0}")]
    Sql(#[from] rusqlite::Error),
    #[error("invalid log: {0}")]
    Log(#[from] LogError),
    #[error("not a results database: {0}")]
    Corrupt(String),
    #[error("property {property:?} is {existing} in the database but {incoming} in the log")]
    TypeClash {
        property: String,
        existing: TypeTag,
        incoming: TypeTag,
    },
    #[error("property name {0:?} is reserved")]
    ReservedName(String),
    #[error("planner {planner:?} declares {name:?} twice (names are case-insensitive)")]
    DuplicateColumn { planner: String, name: String },
    #[error("unknown problem {name:?}; available: {}", available.join(", "))]
    UnknownProblem { name: String, available: Vec<String> },
    #[error("unknown attribute {name:?}{}; available: {}", did_you_mean(suggestions), available.join(", "))]
    UnknownAttribute {
        name: String,
        suggestions: Vec<String>,
        available: Vec<String>,
    },
    #[error("unknown planner {name:?}{}; available: {}", did_you_mean(suggestions), available.join(", "))]
    UnknownPlanner {
        name: String,
        suggestions: Vec<String>,
        available: Vec<String>,
    },
    #[error("attribute {0:?} is not numeric")]
    NotNumeric(String),
}

fn did_you_mean(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", s.join(" or "))
    }
}

/// Names within edit distance 2 of `name`, closest first.
pub(crate) fn near_misses(name: &str, available: &[String]) -> Vec<String> {
    let lower = name.to_ascii_lowercase();
    let mut scored: Vec<(usize, &String)> = available
        .iter()
        .map(|a| (strsim::levenshtein(&lower, &a.to_ascii_lowercase()), a))
        .filter(|(d, _)| *d <= 2)
        .collect();
    scored.sort();
    scored.into_iter().map(|(_, a)| a.clone()).collect()
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS experiments (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    name TEXT NOT NULL,
    totaltime REAL,
    timelimit REAL,
    memorylimit REAL,
    runcount INTEGER,
    version TEXT,
    hostname TEXT,
    cpuinfo TEXT,
    date TEXT,
    seed INTEGER
);
CREATE TABLE IF NOT EXISTS experimentProperties (
    experimentid INTEGER NOT NULL REFERENCES experiments(id) ON DELETE CASCADE,
    name TEXT NOT NULL,
    value TEXT,
    PRIMARY KEY (experimentid, name)
);
CREATE TABLE IF NOT EXISTS plannerConfigs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    name TEXT NOT NULL,
    settings TEXT NOT NULL,
    UNIQUE (name, settings)
);
CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    experimentid INTEGER NOT NULL REFERENCES experiments(id) ON DELETE CASCADE,
    plannerid INTEGER NOT NULL REFERENCES plannerConfigs(id)
);
CREATE TABLE IF NOT EXISTS progress (
    runid INTEGER NOT NULL REFERENCES runs(id) ON DELETE CASCADE
);
CREATE TABLE IF NOT EXISTS enums (
    name TEXT NOT NULL,
    value INTEGER NOT NULL,
    description TEXT NOT NULL,
    PRIMARY KEY (name, value)
);
CREATE TABLE IF NOT EXISTS propertyTypes (
    tablename TEXT NOT NULL,
    name TEXT NOT NULL,
    type TEXT NOT NULL,
    PRIMARY KEY (tablename, name)
);
CREATE INDEX IF NOT EXISTS runs_experiment ON runs(experimentid);
CREATE INDEX IF NOT EXISTS progress_run ON progress(runid);
";

pub struct ResultsDb {
    conn: Connection,
}

impl ResultsDb {
    /// Opens or creates a database file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, DbError> {
        Self::init(Connection::open(path)?)
    }

    pub fn open_in_memory() -> Result<Self, DbError> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self, DbError> {
        conn.busy_timeout(std::time::Duration::from_secs(10))?;
        conn.pragma_update(None, "foreign_keys", true)?;
        // touching the schema surfaces non-database files early
        let check: Result<i64, rusqlite::Error> =
            conn.query_row("SELECT count(*) FROM sqlite_master", [], |r| r.get(0));
        if let Err(e) = check {
            return Err(DbError::Corrupt(e.to_string()));
        }
        conn.execute_batch(SCHEMA)
            .map_err(|e| DbError::Corrupt(e.to_string()))?;
        for table in ["experiments", "plannerConfigs", "runs", "progress", "enums"] {
            let exists: Option<String> = conn
                .query_row(
                    "SELECT name FROM sqlite_master WHERE type = 'table' AND name = ?1",
                    [table],
                    |r| r.get(0),
                )
                .optional()?;
            if exists.is_none() {
                return Err(DbError::Corrupt(format!("missing table {table}")));
            }
        }
        ingest::ensure_status_enums(&conn)?;
        Ok(ResultsDb { conn })
    }

    pub fn connection(&self) -> &Connection {
        &self.conn
    }

    /// Row counts of experiments, runs and progress.
    pub fn counts(&self) -> Result<(u64, u64, u64), DbError> {
        let count = |t: &str| -> Result<u64, DbError> {
            Ok(self
                .conn
                .query_row(&format!("SELECT count(*) FROM {t}"), [], |r| r.get::<_, i64>(0))? as u64)
        };
        Ok((count("experiments")?, count("runs")?, count("progress")?))
    }

    /// Runs without a valid experiment or planner, plus progress rows
    /// without a valid run.
    pub fn orphan_count(&self) -> Result<u64, DbError> {
        let n: i64 = self.conn.query_row(
            "SELECT
               (SELECT count(*) FROM runs r WHERE NOT EXISTS (SELECT 1 FROM experiments e WHERE e.id = r.experimentid)
                                          OR NOT EXISTS (SELECT 1 FROM plannerConfigs p WHERE p.id = r.plannerid))
             + (SELECT count(*) FROM progress g WHERE NOT EXISTS (SELECT 1 FROM runs r WHERE r.id = g.runid))",
            [],
            |r| r.get(0),
        )?;
        Ok(n as u64)
    }

    /// Dynamic columns of `runs` or `progress` in creation order.
    pub fn dynamic_columns(&self, table: &str) -> Result<Vec<String>, DbError> {
        let fixed: &[&str] = if table == RUNS_TABLE {
            &RUNS_FIXED
        } else {
            &PROGRESS_FIXED
        };
        Ok(table_columns(&self.conn, table)?
            .into_iter()
            .filter(|c| !fixed.iter().any(|f| f.eq_ignore_ascii_case(c)))
            .collect())
    }
}

pub(crate) fn table_columns(conn: &Connection, table: &str) -> Result<Vec<String>, DbError> {
    let mut stmt = conn.prepare(&format!("PRAGMA table_info({})", quote(table)))?;
    let cols = stmt
        .query_map([], |r| r.get::<_, String>(1))?
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cols)
}

pub(crate) fn quote(ident: &str) -> String {
    format!("\"{}\"", ident.replace('"', "\"\""))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_miss_ranking() {
        let avail: Vec<String> = ["speed", "time", "solution_length", "sped"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(near_misses("speeed", &avail), vec!["speed", "sped"]);
        assert!(near_misses("zzzz", &avail).is_empty());
    }

    #[test]
    fn fresh_db_is_empty_and_consistent() {
        let db = ResultsDb::open_in_memory().unwrap();
        assert_eq!(db.counts().unwrap(), (0, 0, 0));
        assert_eq!(db.orphan_count().unwrap(), 0);
        assert!(db.dynamic_columns(RUNS_TABLE).unwrap().is_empty());
    }

    #[test]
    fn garbage_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.db");
        std::fs::write(
            &path,
            b"this is definitely not an sqlite file, just some text padding it out",
        )
        .unwrap();
        assert!(matches!(ResultsDb::open(&path), Err(DbError::Corrupt(_))));
    }
}
