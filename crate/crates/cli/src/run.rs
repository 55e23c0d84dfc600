//! Deterministic orchestration of one invocation.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::config::{build_basis, parse_config, ExperimentConfig};
use crate::error::{exit, CliError, CliResult};
use crate::ops::{execute, parse_params, Ctx, OpOutput};
use crate::report::{check_expectations, to_flat_csv, to_json, Table};
use crate::validate::validate_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default)]
pub struct Invocation {
    /// Injected by the subcommand; `None` uses the config's own.
    pub operation: Option<String>,
    pub config_text: String,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Where a named artifact lands: `<stem>.<name>.csv` next to the report.
pub fn artifact_path(out: &Path, name: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{name}.csv"))
}

fn resolve(inv: &Invocation) -> CliResult<(ExperimentConfig, String, u64)> {
    let mut cfg = parse_config(&inv.config_text)?;
    let op = match (&inv.operation, &cfg.operation) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Schema(format!(
                "subcommand `{a}` does not match config operation `{b}`"
            )))
        }
        (Some(a), _) => a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => return Err(CliError::Schema("no operation given".into())),
    };
    let seed = inv.seed.or(cfg.seed).unwrap_or(0);
    cfg.operation = Some(op.clone());
    cfg.seed = Some(seed);
    Ok((cfg, op, seed))
}

struct Collected {
    result: Value,
    budget: u64,
    artifacts: Vec<(String, Table)>,
    exhausted: Option<String>,
}

fn run_once(cfg: &ExperimentConfig, op: &str, seed: u64) -> CliResult<OpOutput> {
    let params = parse_params(op, &cfg.params)?;
    let ctx = Ctx {
        cfg,
        basis: build_basis(&cfg.basis)?,
        seed,
    };
    execute(&ctx, &params)
}

fn collect(cfg: &ExperimentConfig, op: &str, seed: u64) -> CliResult<Collected> {
    let Some(sweep) = &cfg.sweep else {
        let o = run_once(cfg, op, seed)?;
        return Ok(Collected {
            result: o.result,
            budget: o.budget,
            artifacts: o.artifacts,
            exhausted: o.exhausted,
        });
    };
    if sweep.values.is_empty() {
        return Err(CliError::Schema("sweep.values is empty".into()));
    }
    let mut rows = Vec::with_capacity(sweep.values.len());
    let mut all = Collected {
        result: Value::Null,
        budget: 0,
        artifacts: Vec::new(),
        exhausted: None,
    };
    for (i, v) in sweep.values.iter().enumerate() {
        let mut one = cfg.clone();
        one.sweep = None;
        one.params.insert(sweep.param.clone(), v.clone());
        let o = run_once(&one, op, seed)?;
        all.budget += o.budget;
        all.artifacts
            .extend(o.artifacts.into_iter().map(|(n, t)| (format!("{n}.{i}"), t)));
        if all.exhausted.is_none() {
            all.exhausted = o.exhausted.map(|m| format!("{}={v}: {m}", sweep.param));
        }
        rows.push(json!({"value": v, "result": o.result, "budget_consumed": o.budget}));
    }
    all.result = json!({"sweep": sweep.param, "table": rows});
    Ok(all)
}

/// Runs the invocation, writes its outputs and returns the exit code.
///
/// The report is written even when the budget is exhausted or an
/// expectation fails, so the failure can be inspected.
pub fn run(inv: &Invocation) -> CliResult<i32> {
    let start = Instant::now();
    if inv.operation.as_deref() == Some("validate") {
        return write_validation(inv, start);
    }
    let (cfg, op, seed) = resolve(inv)?;
    if op == "validate" {
        return write_validation(inv, start);
    }
    let c = collect(&cfg, &op, seed)?;

    let mut artifacts = Map::new();
    for (name, table) in &c.artifacts {
        let entry = match &inv.out {
            Some(out) => {
                let path = artifact_path(out, name);
                std::fs::write(&path, table.to_csv())?;
                json!(path.file_name().map(|f| f.to_string_lossy().into_owned()))
            }
            None => Value::Null,
        };
        artifacts.insert(name.clone(), entry);
    }

    let mut report = Map::new();
    report.insert("operation".into(), json!(op));
    report.insert("seed".into(), json!(seed));
    report.insert(
        "config".into(),
        serde_json::to_value(&cfg).map_err(|e| CliError::Internal(e.to_string()))?,
    );
    report.insert("result".into(), c.result.clone());
    report.insert("budget_consumed".into(), json!(c.budget));
    report.insert("artifacts".into(), Value::Object(artifacts));
    let mut code = exit::OK;
    if !cfg.expect.is_empty() {
        let (pass, detail) = check_expectations(&c.result, &cfg.expect);
        report.insert("expectations".into(), detail);
        report.insert("pass".into(), json!(pass));
        if !pass {
            code = exit::EXPECTATION;
        }
    }
    if let Some(m) = &c.exhausted {
        report.insert("exhausted".into(), json!(m));
        code = exit::EXHAUSTED;
    }
    report.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));

    write_report(inv, Value::Object(report))?;
    if let Some(m) = c.exhausted {
        eprintln!("{}", CliError::Exhausted(m));
    }
    Ok(code)
}

/// Diagnostics of the config's own operation; a config that does not parse
/// is itself a diagnostic.
fn write_validation(inv: &Invocation, start: Instant) -> CliResult<i32> {
    let diags = validate_text(&inv.config_text, None);
    let mut report = Map::new();
    report.insert("operation".into(), json!("validate"));
    report.insert(
        "result".into(),
        json!({"valid": diags.is_empty(), "diagnostics": diags}),
    );
    report.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    write_report(inv, Value::Object(report))?;
    Ok(exit::OK)
}

fn write_report(inv: &Invocation, report: Value) -> CliResult<()> {
    let text = match inv.format {
        Format::Json => to_json(&report),
        Format::Csv => to_flat_csv(&report),
    };
    match &inv.out {
        Some(out) => std::fs::write(out, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artifact_names() {
        let p = artifact_path(Path::new("/tmp/run/rep.json"), "cloud");
        assert_eq!(p, PathBuf::from("/tmp/run/rep.cloud.csv"));
    }

    #[test]
    fn subcommand_must_match() {
        let inv = Invocation {
            operation: Some("cube".into()),
            config_text: r#"{"operation": "potts"}"#.into(),
            ..Invocation::default()
        };
        assert!(matches!(resolve(&inv), Err(CliError::Schema(_))));
    }

    #[test]
    fn seed_flag_wins() {
        let inv = Invocation {
            operation: Some("embed".into()),
            config_text: r#"{"seed": 3}"#.into(),
            seed: Some(9),
            ..Invocation::default()
        };
        let (cfg, _, seed) = resolve(&inv).unwrap();
        assert_eq!(seed, 9);
        assert_eq!(cfg.seed, Some(9));
    }

    #[test]
    fn sweeps_make_tables() {
        let cfg = parse_config(
            r#"{"operation": "embed", "params": {"g": [{"x": 1, "y": 0, "z": 0}]},
                "sweep": {"param": "alphas", "values": [[1], [2], [3]]}}"#,
        )
        .unwrap();
        let c = collect(&cfg, "embed", 0).unwrap();
        let rows = c.result["table"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2]["result"]["tuple"][0]["x"].as_f64(), Some(3.0));
    }
}
