use std::str::FromStr;

use indexmap::IndexMap;

use super::{ExperimentLog, LogError, PlannerBlock, PropertyDecl, RunRecord, ABSENT_MARKER};
use crate::props::{is_valid_property_name, TypeTag, Value};

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Splits at unescaped `sep`, returning each piece with its char offset.
fn split_unescaped(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut start_col = 0;
    let mut escaped = false;
    for (col, (i, c)) in s.char_indices().enumerate() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == sep {
            out.push((start_col, &s[start..i]));
            start = i + c.len_utf8();
            start_col = col + 1;
        }
    }
    out.push((start_col, &s[start..]));
    out
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        while lines.last().is_some_and(|l| l.is_empty()) {
            lines.pop();
        }
        Lines { lines, pos: 0 }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> LogError {
        LogError::Syntax {
            line: self.pos,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self, expected: &str) -> Result<&'a str, LogError> {
        match self.lines.get(self.pos) {
            Some(l) => {
                self.pos += 1;
                Ok(l)
            }
            None => Err(LogError::Syntax {
                line: self.pos + 1,
                column: 1,
                message: format!("unexpected end of log, expected {expected}"),
            }),
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn prefixed(&mut self, prefix: &str) -> Result<&'a str, LogError> {
        let l = self.next(&format!("'{prefix}...'"))?;
        l.strip_prefix(prefix)
            .ok_or_else(|| self.err(1, format!("expected '{}...'", prefix.trim_end())))
    }

    fn framed(&mut self, prefix: &str, suffix: &str) -> Result<&'a str, LogError> {
        let rest = self.prefixed(prefix)?;
        rest.strip_suffix(suffix).ok_or_else(|| {
            self.err(
                prefix.len() + rest.len() + 1,
                format!("expected '{}' at end of line", suffix.trim()),
            )
        })
    }

    fn number<T: FromStr>(&self, text: &str, column: usize, what: &str) -> Result<T, LogError> {
        text.trim()
            .parse()
            .map_err(|_| self.err(column, format!("invalid {what} {text:?}")))
    }

    /// `<int> <suffix>` lines.
    fn count(&mut self, suffix: &str) -> Result<usize, LogError> {
        let l = self.next(&format!("'<count> {suffix}'"))?;
        let head = l
            .strip_suffix(suffix)
            .and_then(|h| h.strip_suffix(' '))
            .ok_or_else(|| self.err(1, format!("expected '<count> {suffix}'")))?;
        self.number(head, 1, "count")
    }

    fn key_values(&mut self, n: usize) -> Result<IndexMap<String, String>, LogError> {
        let mut map = IndexMap::new();
        for _ in 0..n {
            let l = self.next("'key = value'")?;
            let (_, key) = split_unescaped(l, '=')[0];
            let sep = key.len();
            if !key.ends_with(' ') || !l[sep..].starts_with("= ") {
                return Err(self.err(1, "expected 'key = value'"));
            }
            let k = unescape(&key[..key.len() - 1]);
            let v = unescape(&l[sep + 2..]);
            if map.insert(k.clone(), v).is_some() {
                return Err(self.err(1, format!("duplicate key {k:?}")));
            }
        }
        Ok(map)
    }

    fn decls(&mut self, n: usize, planner: &str) -> Result<Vec<PropertyDecl>, LogError> {
        let mut out: Vec<PropertyDecl> = Vec::with_capacity(n);
        for _ in 0..n {
            let l = self.next("'<name> <TYPE>'")?;
            let (name, tag) = l
                .split_once(' ')
                .ok_or_else(|| self.err(1, "expected '<name> <TYPE>'"))?;
            if !is_valid_property_name(name) {
                return Err(self.err(1, format!("invalid property name {name:?}")));
            }
            let tag: TypeTag = tag.trim().parse().map_err(|e: String| self.err(name.len() + 2, e))?;
            if out.iter().any(|d| d.name == name) {
                return Err(self.err(
                    1,
                    LogError::DuplicateProperty {
                        planner: planner.to_string(),
                        name: name.to_string(),
                    }
                    .to_string(),
                ));
            }
            out.push(PropertyDecl::new(name, tag));
        }
        Ok(out)
    }

    fn value(&self, raw: &str, decl: &PropertyDecl, column: usize) -> Result<Option<Value>, LogError> {
        if decl.tag == TypeTag::String {
            return Ok(if raw == ABSENT_MARKER {
                None
            } else {
                Some(Value::String(unescape(raw)))
            });
        }
        let t = raw.trim();
        if t == ABSENT_MARKER {
            return Ok(None);
        }
        let bad = || {
            self.err(
                column,
                format!("{t:?} is not a valid {} value for {}", decl.tag, decl.name),
            )
        };
        Ok(Some(match decl.tag {
            TypeTag::Integer => Value::Integer(t.parse().map_err(|_| bad())?),
            TypeTag::Enum => Value::Enum(t.parse().map_err(|_| bad())?),
            TypeTag::Real => Value::Real(t.parse().map_err(|_| bad())?),
            TypeTag::Boolean => Value::Boolean(match t {
                "true" | "1" => true,
                "false" | "0" => false,
                _ => return Err(bad()),
            }),
            TypeTag::String => unreachable!(),
        }))
    }

    fn run_line(&mut self, schema: &[PropertyDecl], planner: &str, run: usize) -> Result<Vec<Option<Value>>, LogError> {
        let l = self.next("a run line")?;
        if schema.is_empty() {
            if !l.is_empty() {
                return Err(self.err(1, "values on a run line with no declared properties"));
            }
            return Ok(Vec::new());
        }
        let fields = split_unescaped(l, ';');
        if fields.len() != schema.len() {
            return Err(self.err(
                1,
                LogError::ColumnCount {
                    planner: planner.to_string(),
                    run,
                    found: fields.len(),
                    declared: schema.len(),
                }
                .to_string(),
            ));
        }
        fields
            .iter()
            .zip(schema)
            .enumerate()
            .map(|(i, (&(col, raw), decl))| {
                let trimmed = if i > 0 {
                    raw.strip_prefix(' ').unwrap_or(raw)
                } else {
                    raw
                };
                self.value(trimmed, decl, col + 1 + (raw.len() - trimmed.len()))
            })
            .collect()
    }

    fn progress_line(
        &mut self,
        schema: &[PropertyDecl],
        planner: &str,
        run: usize,
    ) -> Result<Vec<Vec<Option<Value>>>, LogError> {
        let l = self.next("a progress line")?;
        let mut tuples = split_unescaped(l, ';');
        if tuples.last().is_some_and(|(_, t)| t.is_empty()) {
            tuples.pop();
        }
        let mut out = Vec::with_capacity(tuples.len());
        for (tcol, tuple) in tuples {
            let fields = split_unescaped(tuple, ',');
            if fields.len() != schema.len() {
                return Err(self.err(
                    tcol + 1,
                    LogError::ColumnCount {
                        planner: planner.to_string(),
                        run,
                        found: fields.len(),
                        declared: schema.len(),
                    }
                    .to_string(),
                ));
            }
            out.push(
                fields
                    .iter()
                    .zip(schema)
                    .map(|(&(c, raw), d)| self.value(raw, d, tcol + c + 1))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        Ok(out)
    }

    fn planner(&mut self) -> Result<PlannerBlock, LogError> {
        let name = unescape(self.prefixed("planner ")?);
        let n = self.count("common properties")?;
        let settings = self.key_values(n)?;
        let n = self.count("properties for each run")?;
        let run_schema = self.decls(n, &name)?;
        let n = self.count("runs")?;
        let mut runs = Vec::with_capacity(n);
        for i in 0..n {
            runs.push(RunRecord {
                values: self.run_line(&run_schema, &name, i)?,
                progress: Vec::new(),
            });
        }
        let n = self.count("progress properties")?;
        let progress_schema = self.decls(n, &name)?;
        let streams = self.count("runs with progress data")?;
        if streams != 0 && streams != runs.len() {
            return Err(self.err(
                1,
                LogError::ProgressCount {
                    planner: name,
                    found: streams,
                    runs: runs.len(),
                }
                .to_string(),
            ));
        }
        for (i, run) in runs.iter_mut().enumerate().take(streams) {
            run.progress = self.progress_line(&progress_schema, &name, i)?;
        }
        let end = self.next("'.'")?;
        if end != "." {
            return Err(self.err(1, "expected '.' closing the planner block"));
        }
        Ok(PlannerBlock {
            name,
            settings,
            run_schema,
            runs,
            progress_schema,
            has_progress: streams > 0,
        })
    }
}

/// Parses one experiment log. Errors carry 1-based line and column numbers.
pub fn parse_log(text: &str) -> Result<ExperimentLog, LogError> {
    let mut p = Lines::new(text);
    let name = unescape(p.prefixed("Experiment ")?);
    let hostname = unescape(p.prefixed("Running on ")?);
    let date = unescape(p.prefixed("Starting at ")?);
    let mut cpu = Vec::new();
    loop {
        let l = p.next("'.' ending the cpu information")?;
        if l == "." {
            break;
        }
        cpu.push(unescape(l.strip_prefix('.').unwrap_or(l)));
    }
    let cpuinfo = cpu.join("\n");
    let seed_text = p.prefixed("Seed ")?;
    let seed = p.number(seed_text, 6, "seed")?;
    let t = p.framed("Time limit ", " seconds")?;
    let time_limit = p.number(t, 12, "time limit")?;
    let m = p.framed("Memory limit ", " MB")?;
    let memory_limit_mb = p.number(m, 14, "memory limit")?;
    let run_count = p.count("runs per planner")? as u64;
    let t = p.framed("Total time ", " seconds")?;
    let total_time = p.number(t, 12, "total time")?;
    let mut version = String::new();
    if let Some(v) = p.peek().and_then(|l| l.strip_prefix("Version ")) {
        version = unescape(v);
        p.pos += 1;
    }
    let mut problem_properties = IndexMap::new();
    if p.peek().is_some_and(|l| l.ends_with(" experiment properties")) {
        let n = p.count("experiment properties")?;
        problem_properties = p.key_values(n)?;
    }
    let n = p.count("planners")?;
    let mut planners = Vec::with_capacity(n);
    for _ in 0..n {
        planners.push(p.planner()?);
    }
    if p.peek().is_some() {
        p.pos += 1;
        return Err(p.err(1, "trailing content after the last planner block"));
    }
    Ok(ExperimentLog {
        name,
        version,
        hostname,
        cpuinfo,
        date,
        seed,
        time_limit,
        memory_limit_mb,
        run_count,
        total_time,
        problem_properties,
        planners,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unescape_inverts_escapes() {
        assert_eq!(unescape("a\\;b\\,c\\\\d\\te\\n\\N/A"), "a;b,c\\d\te\nN/A");
    }

    #[test]
    fn split_respects_escapes() {
        let parts: Vec<&str> = split_unescaped("a\\;b; c;", ';').into_iter().map(|(_, s)| s).collect();
        assert_eq!(parts, ["a\\;b", " c", ""]);
        assert_eq!(split_unescaped("x;yz;w", ';')[2].0, 5);
    }
}
