use std::fmt::Write as _;

use super::{ExperimentLog, LogError, ABSENT_MARKER};
use crate::props::Value;

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e17)`.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub(super) fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
}

fn escape_value(s: &str, out: &mut String) {
    if s == ABSENT_MARKER {
        out.push('\\');
    }
    for c in s.chars() {
        match c {
            ';' => out.push_str("\\;"),
            ',' => out.push_str("\\,"),
            c => escape_text(c.encode_utf8(&mut [0; 4]), out),
        }
    }
}

fn escape_key(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '=' => out.push_str("\\="),
            c => escape_text(c.encode_utf8(&mut [0; 4]), out),
        }
    }
}

fn write_value(v: &Option<Value>, out: &mut String) {
    match v {
        None => out.push_str(ABSENT_MARKER),
        Some(Value::Integer(i)) | Some(Value::Enum(i)) => {
            let _ = write!(out, "{i}");
        }
        Some(Value::Real(r)) => out.push_str(&format_real(*r)),
        Some(Value::Boolean(b)) => out.push_str(if *b { "true" } else { "false" }),
        Some(Value::String(s)) => escape_value(s, out),
    }
}

fn line(out: &mut String, head: &str, text: &str) {
    out.push_str(head);
    escape_text(text, out);
    out.push('\n');
}

pub fn write_log(log: &ExperimentLog) -> Result<String, LogError> {
    log.validate()?;
    let mut out = String::new();
    line(&mut out, "Experiment ", &log.name);
    line(&mut out, "Running on ", &log.hostname);
    line(&mut out, "Starting at ", &log.date);
    if !log.cpuinfo.is_empty() {
        for l in log.cpuinfo.split('\n') {
            if l.starts_with('.') {
                out.push('.');
            }
            escape_text(l, &mut out);
            out.push('\n');
        }
    }
    out.push_str(".\n");
    let _ = writeln!(out, "Seed {}", log.seed);
    let _ = writeln!(out, "Time limit {} seconds", format_real(log.time_limit));
    let _ = writeln!(out, "Memory limit {} MB", format_real(log.memory_limit_mb));
    let _ = writeln!(out, "{} runs per planner", log.run_count);
    let _ = writeln!(out, "Total time {} seconds", format_real(log.total_time));
    line(&mut out, "Version ", &log.version);
    let _ = writeln!(out, "{} experiment properties", log.problem_properties.len());
    for (k, v) in &log.problem_properties {
        escape_key(k, &mut out);
        out.push_str(" = ");
        escape_text(v, &mut out);
        out.push('\n');
    }
    let _ = writeln!(out, "{} planners", log.planners.len());
    for p in &log.planners {
        line(&mut out, "planner ", &p.name);
        let _ = writeln!(out, "{} common properties", p.settings.len());
        for (k, v) in &p.settings {
            escape_key(k, &mut out);
            out.push_str(" = ");
            escape_text(v, &mut out);
            out.push('\n');
        }
        let _ = writeln!(out, "{} properties for each run", p.run_schema.len());
        for d in &p.run_schema {
            let _ = writeln!(out, "{} {}", d.name, d.tag);
        }
        let _ = writeln!(out, "{} runs", p.runs.len());
        for r in &p.runs {
            for (i, v) in r.values.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                write_value(v, &mut out);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{} progress properties", p.progress_schema.len());
        for d in &p.progress_schema {
            let _ = writeln!(out, "{} {}", d.name, d.tag);
        }
        let streams = if p.has_progress { p.runs.len() } else { 0 };
        let _ = writeln!(out, "{streams} runs with progress data");
        if p.has_progress {
            for r in &p.runs {
                for (i, tuple) in r.progress.iter().enumerate() {
                    if i > 0 {
                        out.push(';');
                    }
                    for (j, v) in tuple.iter().enumerate() {
                        if j > 0 {
                            out.push(',');
                        }
                        write_value(v, &mut out);
                    }
                }
                out.push('\n');
            }
        }
        out.push_str(".\n");
    }
    Ok(out)
}
