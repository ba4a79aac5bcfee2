use indexmap::IndexMap;

use super::PlannerError;

#[derive(Debug, Clone, Copy)]
pub(crate) enum ParamKind {
    /// Real in a closed range.
    Real {
        min: f64,
        max: f64,
    },
    /// Real with an exclusive lower bound.
    PositiveReal,
    Count {
        min: u64,
    },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ParamDecl {
    pub name: &'static str,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ParamValue {
    Real(f64),
    Count(u64),
}

/// Resolved parameter set: every declared parameter has a value.
#[derive(Debug, Clone)]
pub(crate) struct Params {
    values: IndexMap<&'static str, ParamValue>,
}

impl Params {
    /// Parses `given` against `decls`. `defaults` must cover every declared name.
    pub(crate) fn resolve(
        planner: &str,
        decls: &[ParamDecl],
        defaults: &[(&'static str, ParamValue)],
        given: &IndexMap<String, String>,
    ) -> Result<Params, PlannerError> {
        for key in given.keys() {
            if !decls.iter().any(|d| d.name == key) {
                return Err(PlannerError::UnknownParameter {
                    planner: planner.to_string(),
                    name: key.clone(),
                    known: decls.iter().map(|d| d.name.to_string()).collect(),
                });
            }
        }
        let mut values = IndexMap::new();
        for d in decls {
            let value = match given.get(d.name) {
                Some(text) => parse_value(planner, d, text)?,
                None => defaults
                    .iter()
                    .find(|(n, _)| *n == d.name)
                    .map(|(_, v)| *v)
                    .expect("default for every declared parameter"),
            };
            values.insert(d.name, value);
        }
        Ok(Params { values })
    }

    pub(crate) fn real(&self, name: &str) -> f64 {
        match self.values[name] {
            ParamValue::Real(v) => v,
            ParamValue::Count(v) => v as f64,
        }
    }

    pub(crate) fn count(&self, name: &str) -> usize {
        match self.values[name] {
            ParamValue::Count(v) => v as usize,
            ParamValue::Real(v) => v as usize,
        }
    }

    /// Effective settings as strings, in declaration order.
    pub(crate) fn settings(&self) -> IndexMap<String, String> {
        self.values
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    ParamValue::Real(x) => x.to_string(),
                    ParamValue::Count(n) => n.to_string(),
                };
                (k.to_string(), s)
            })
            .collect()
    }
}

fn parse_value(planner: &str, d: &ParamDecl, text: &str) -> Result<ParamValue, PlannerError> {
    let bad = |reason: String| PlannerError::BadParameterValue {
        planner: planner.to_string(),
        name: d.name.to_string(),
        value: text.to_string(),
        reason,
    };
    let t = text.trim();
    match d.kind {
        ParamKind::Real { min, max } => {
            let v: f64 = t.parse().map_err(|_| bad("not a number".into()))?;
            if !(v >= min && v <= max) {
                return Err(bad(format!("must lie in [{min}, {max}]")));
            }
            Ok(ParamValue::Real(v))
        }
        ParamKind::PositiveReal => {
            let v: f64 = t.parse().map_err(|_| bad("not a number".into()))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad("must be positive".into()));
            }
            Ok(ParamValue::Real(v))
        }
        ParamKind::Count { min } => {
            let v: u64 = t.parse().map_err(|_| bad("not a nonnegative integer".into()))?;
            if v < min {
                return Err(bad(format!("must be at least {min}")));
            }
            Ok(ParamValue::Count(v))
        }
    }
}
