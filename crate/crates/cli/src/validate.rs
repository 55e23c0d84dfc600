//! Static checks of a config; problems are returned as data, never raised.

use std::collections::BTreeSet;

use nilprobe_core::algebra::Basis;
use serde::Serialize;
use serde_json::Value;

use crate::config::{build_basis, build_system, parse_config, ExperimentConfig, Num};
use crate::error::CliError;
use crate::ops::{parse_params, Params, OPERATIONS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: &'static str,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: &'static str, field: &str, message: impl Into<String>) -> Self {
        Self {
            kind,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn from_error(field: &str, e: &CliError) -> Self {
        let message = match e {
            CliError::Schema(m) | CliError::UnsupportedBasis(m) => m.clone(),
            other => other.to_string(),
        };
        Self::new(e.kind(), field, message)
    }
}

/// Every schema and semantic problem of the config text.
pub fn validate_text(text: &str, op: Option<&str>) -> Vec<Diagnostic> {
    match parse_config(text) {
        Ok(cfg) => validate(&cfg, op),
        Err(e) => vec![Diagnostic::from_error("", &e)],
    }
}

pub fn validate(cfg: &ExperimentConfig, op: Option<&str>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let op = op.or(cfg.operation.as_deref());
    let basis = match build_basis(&cfg.basis) {
        Ok(b) => Some(b),
        Err(e) => {
            out.push(Diagnostic::from_error("basis", &e));
            None
        }
    };
    if let Some(b) = &basis {
        for (field, spec) in [("system", &cfg.system), ("system_h", &cfg.system_h)] {
            if let Some(spec) = spec {
                if let Err(e) = build_system(spec, b) {
                    out.push(Diagnostic::from_error(field, &e));
                }
            }
        }
    }
    if let Some(sweep) = &cfg.sweep {
        if sweep.values.is_empty() {
            out.push(Diagnostic::new("SCHEMA", "sweep.values", "sweep needs at least one value"));
        }
    }
    scan_alphas("params", &Value::Object(cfg.params.clone()), &mut out);
    let params = match op {
        None => {
            out.push(Diagnostic::new("SCHEMA", "operation", "no operation given"));
            None
        }
        Some("validate") => None,
        Some(name) if !OPERATIONS.contains(&name) => {
            out.push(Diagnostic::new("SCHEMA", "operation", format!("unknown operation `{name}`")));
            None
        }
        Some(name) => match parse_params(name, &cfg.params) {
            Ok(p) => Some(p),
            Err(e) => {
                out.push(Diagnostic::from_error("params", &e));
                None
            }
        },
    };
    if let (Some(b), Some(p)) = (&basis, &params) {
        let times: Vec<&Num> = match p {
            Params::Minimal(m) => m.t.iter().collect(),
            Params::Exceptional(e) => e.t_values.iter().collect(),
            _ => Vec::new(),
        };
        if let Some(spec) = &cfg.system {
            closure_scan(b, &spec.frequencies(), &times, &mut out);
        }
    }
    out
}

/// Zero or repeated multipliers in any `alphas` array, one diagnostic per field.
fn scan_alphas(path: &str, v: &Value, out: &mut Vec<Diagnostic>) {
    let Value::Object(map) = v else { return };
    for (k, item) in map {
        let field = format!("{path}.{k}");
        if k == "alphas" {
            if let Some(list) = item.as_array() {
                let nums: Vec<f64> = list.iter().filter_map(Value::as_f64).collect();
                let bad = nums
                    .iter()
                    .enumerate()
                    .any(|(i, a)| *a == 0.0 || nums[..i].contains(a));
                if bad {
                    out.push(Diagnostic::new(
                        "SEMANTIC",
                        &field,
                        "multipliers must be distinct and nonzero",
                    ));
                }
            }
        } else {
            scan_alphas(&field, item, out);
        }
    }
}

/// Products `frequency symbol × time symbol` the time-`t` test will need.
fn closure_scan(basis: &Basis, freqs: &[&Num], times: &[&Num], out: &mut Vec<Diagnostic>) {
    let symbols = |nums: &[&Num]| -> BTreeSet<String> {
        nums.iter()
            .filter(|n| matches!(n, Num::Expr(_)))
            .filter_map(|n| n.symbolic().ok())
            .flat_map(|s| s.symbols().map(str::to_string).collect::<Vec<_>>())
            .collect()
    };
    let (fs, ts) = (symbols(freqs), symbols(times));
    let mut missing = BTreeSet::new();
    for a in &fs {
        for b in &ts {
            if let Err(e) = basis.symbol_product(a, b) {
                missing.insert(CliError::from(e).to_string());
            }
        }
    }
    for m in missing {
        let kind = if m.starts_with("UNSUPPORTED-BASIS") {
            "UNSUPPORTED-BASIS"
        } else {
            "SCHEMA"
        };
        out.push(Diagnostic::new(kind, "params.t", m));
    }
}
