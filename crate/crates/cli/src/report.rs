//! Report rendering. Every float is written with 17 significant digits so
//! that it parses back to the same `f64`.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::config::Expectation;

/// `v` with 17 significant digits; non-finite values become `null`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn fmt_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        fmt_f64(n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&fmt_number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

/// Leaf values as `path,value` rows.
pub fn to_flat_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    walk(&join(&i.to_string()), item, rows);
                }
            }
            Value::Object(map) => {
                for (k, item) in map {
                    walk(&join(k), item, rows);
                }
            }
            Value::Number(n) => rows.push((prefix.to_string(), fmt_number(n))),
            Value::String(s) => rows.push((prefix.to_string(), csv_field(s))),
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut s = String::from("path,value\n");
    for (p, val) in rows {
        let _ = writeln!(s, "{},{}", csv_field(&p), val);
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Numeric table written as a sibling CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Value at a dot-separated path; `*` matches every array element.
pub fn lookup<'a>(v: &'a Value, path: &str) -> Vec<&'a Value> {
    let mut current = vec![v];
    for seg in path.split('.').filter(|s| !s.is_empty()) {
        let mut next = Vec::new();
        for node in current {
            match node {
                Value::Object(m) => next.extend(m.get(seg)),
                Value::Array(items) if seg == "*" => next.extend(items.iter()),
                Value::Array(items) => next.extend(seg.parse::<usize>().ok().and_then(|i| items.get(i))),
                _ => {}
            }
        }
        current = next;
    }
    current
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        _ => a == b,
    }
}

/// One entry per declared expectation; a path that resolves to nothing fails.
pub fn check_expectations(
    result: &Value,
    expect: &std::collections::BTreeMap<String, Expectation>,
) -> (bool, Value) {
    let mut all = true;
    let mut out = Map::new();
    for (path, e) in expect {
        let found = lookup(result, path);
        let ok = !found.is_empty()
            && found.iter().all(|v| {
                let num = v.as_f64();
                e.min.is_none_or(|m| num.is_some_and(|x| x >= m))
                    && e.max.is_none_or(|m| num.is_some_and(|x| x <= m))
                    && e.equals.as_ref().is_none_or(|want| values_equal(v, want))
            });
        all &= ok;
        let observed = match found.as_slice() {
            [] => Value::Null,
            [one] => (*one).clone(),
            many => Value::Array(many.iter().map(|v| (*v).clone()).collect()),
        };
        let mut entry = Map::new();
        entry.insert("pass".into(), Value::Bool(ok));
        entry.insert("observed".into(), observed);
        entry.insert("expected".into(), serde_json::to_value(e).unwrap_or(Value::Null));
        out.insert(path.clone(), Value::Object(entry));
    }
    (all, Value::Object(out))
}
