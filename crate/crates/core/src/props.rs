//! Typed property values shared by planners, run records and the log format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TypeTag {
    Integer,
    Real,
    Boolean,
    Enum,
    String,
}

impl TypeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            TypeTag::Integer => "INTEGER",
            TypeTag::Real => "REAL",
            TypeTag::Boolean => "BOOLEAN",
            TypeTag::Enum => "ENUM",
            TypeTag::String => "STRING",
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, TypeTag::String)
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TypeTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "INTEGER" => Ok(TypeTag::Integer),
            "REAL" => Ok(TypeTag::Real),
            "BOOLEAN" => Ok(TypeTag::Boolean),
            "ENUM" => Ok(TypeTag::Enum),
            "STRING" => Ok(TypeTag::String),
            other => Err(format!("unknown type tag {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Enum(i64),
    String(String),
}

impl Value {
    pub fn tag(&self) -> TypeTag {
        match self {
            Value::Integer(_) => TypeTag::Integer,
            Value::Real(_) => TypeTag::Real,
            Value::Boolean(_) => TypeTag::Boolean,
            Value::Enum(_) => TypeTag::Enum,
            Value::String(_) => TypeTag::String,
        }
    }

    /// Numeric view used by the statistics layer.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(v) | Value::Enum(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            Value::Boolean(b) => Some(if *b { 1.0 } else { 0.0 }),
            Value::String(_) => None,
        }
    }
}

/// Property name rule: `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_valid_property_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert!(is_valid_property_name("solution_length"));
        assert!(is_valid_property_name("_x9"));
        assert!(!is_valid_property_name("9x"));
        assert!(!is_valid_property_name("a-b"));
        assert!(!is_valid_property_name(""));
    }

    #[test]
    fn tags_round_trip() {
        for t in [
            TypeTag::Integer,
            TypeTag::Real,
            TypeTag::Boolean,
            TypeTag::Enum,
            TypeTag::String,
        ] {
            assert_eq!(t.as_str().parse::<TypeTag>().unwrap(), t);
        }
    }
}
