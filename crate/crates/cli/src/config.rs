use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use nilprobe_core::algebra::{radicand, sqrt_decimal, Basis, SymbolicReal};
use nilprobe_core::averages::{Observable, TrigPolynomial};
use nilprobe_core::systems::{HeisenbergElement, Nilflow, SystemHandle, TorusFlow, TorusMap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Decimal digits generated for radical symbols declared as `"auto"`.
const AUTO_DIGITS: u32 = 50;

/// One experiment: a single JSON document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Symbol → decimal rendering; `"auto"` for `√n`.
    #[serde(default)]
    pub basis: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_h: Option<SystemSpec>,
    #[serde(default)]
    pub params: Map<String, Value>,
    /// Result path (dot separated) → bound.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<String, Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Outputs>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<Value>,
}

/// Runs the operation once per value of `params[param]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<Value>,
}

/// A number given either as a float or as an exact expression over the basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Expr(String),
}

impl Num {
    pub fn symbolic(&self) -> CliResult<SymbolicReal> {
        let text = match self {
            Num::Float(v) => format!("{v}"),
            Num::Expr(s) => s.clone(),
        };
        Ok(text.parse()?)
    }

    pub fn value(&self, basis: &Basis) -> CliResult<f64> {
        match self {
            Num::Float(v) => Ok(*v),
            Num::Expr(_) => Ok(self.symbolic()?.to_f64(basis)?),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Num::Float(v) => format!("{v}"),
            Num::Expr(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    TorusFlow { freqs: Vec<Num> },
    TorusMap { rotation: Vec<Num> },
    HeisenbergFlow { generator: [Num; 3] },
    HeisenbergMap { generator: [Num; 3] },
    Suspension { base: Box<SystemSpec> },
}

impl SystemSpec {
    /// Every exact entry, for basis-closure scans.
    pub fn frequencies(&self) -> Vec<&Num> {
        match self {
            SystemSpec::TorusFlow { freqs } => freqs.iter().collect(),
            SystemSpec::TorusMap { rotation } => rotation.iter().collect(),
            SystemSpec::HeisenbergFlow { generator } | SystemSpec::HeisenbergMap { generator } => {
                generator[..2].iter().collect()
            }
            SystemSpec::Suspension { base } => base.frequencies(),
        }
    }
}

pub fn build_basis(decls: &BTreeMap<String, String>) -> CliResult<Arc<Basis>> {
    let mut basis = Basis::new();
    for (symbol, decimal) in decls {
        let rendered = if decimal.trim() == "auto" {
            let n = radicand(symbol).ok_or_else(|| {
                CliError::Schema(format!("basis.{symbol}: \"auto\" needs a radical symbol √n"))
            })?;
            sqrt_decimal(n, AUTO_DIGITS)
        } else {
            decimal.clone()
        };
        basis
            .declare(symbol, &rendered)
            .map_err(|e| CliError::Schema(format!("basis.{symbol}: {e}")))?;
    }
    Ok(Arc::new(basis))
}

fn all_exact(nums: &[Num]) -> bool {
    nums.iter().all(|n| matches!(n, Num::Expr(_)))
}

fn symbolic(nums: &[Num]) -> CliResult<Vec<SymbolicReal>> {
    nums.iter().map(Num::symbolic).collect()
}

fn floats(nums: &[Num], basis: &Basis) -> CliResult<Vec<f64>> {
    nums.iter().map(|n| n.value(basis)).collect()
}

fn nilflow(generator: &[Num; 3], basis: &Arc<Basis>) -> CliResult<Nilflow> {
    if all_exact(generator) {
        let [a, b, c] = generator.each_ref().map(Num::symbolic);
        return Ok(Nilflow::from_symbolic(basis.clone(), [a?, b?, c?])?);
    }
    let v = floats(generator, basis)?;
    Ok(Nilflow::new(HeisenbergElement::new(v[0], v[1], v[2]))?)
}

/// Systems given entirely by exact expressions keep an exact shadow.
pub fn build_system(spec: &SystemSpec, basis: &Arc<Basis>) -> CliResult<SystemHandle> {
    Ok(match spec {
        SystemSpec::TorusFlow { freqs } if all_exact(freqs) => {
            SystemHandle::TorusFlow(TorusFlow::from_symbolic(basis.clone(), symbolic(freqs)?)?)
        }
        SystemSpec::TorusFlow { freqs } => SystemHandle::torus_flow(floats(freqs, basis)?)?,
        SystemSpec::TorusMap { rotation } if all_exact(rotation) => {
            SystemHandle::TorusMap(TorusMap::from_symbolic(basis.clone(), symbolic(rotation)?)?)
        }
        SystemSpec::TorusMap { rotation } => SystemHandle::torus_map(floats(rotation, basis)?)?,
        SystemSpec::HeisenbergFlow { generator } => {
            SystemHandle::HeisenbergFlow(nilflow(generator, basis)?)
        }
        SystemSpec::HeisenbergMap { generator } => {
            SystemHandle::HeisenbergMap(nilflow(generator, basis)?)
        }
        SystemSpec::Suspension { base } => SystemHandle::suspension(build_system(base, basis)?)?,
    })
}

/// Trigonometric observables expressible in a config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    One { dim: usize },
    /// `c·e(k·x)`, with `c = (re, im)` defaulting to 1.
    Exp {
        k: Vec<i64>,
        #[serde(default)]
        coeff: Option<[f64; 2]>,
    },
    Cos { k: Vec<i64> },
    Trig { dim: usize, terms: Vec<TermSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ObservableSpec {
    pub fn build(&self) -> CliResult<Observable> {
        let p = match self {
            ObservableSpec::One { dim } => {
                if *dim == 0 {
                    return Err(CliError::Schema("observable.dim must be positive".into()));
                }
                TrigPolynomial::constant(*dim, Complex64::new(1.0, 0.0))
            }
            ObservableSpec::Exp { k, coeff } => {
                let [re, im] = coeff.unwrap_or([1.0, 0.0]);
                TrigPolynomial::new(k.len(), vec![(k.clone(), Complex64::new(re, im))])?
            }
            ObservableSpec::Cos { k } => {
                if k.is_empty() {
                    return Err(CliError::Schema("observable.k must be non-empty".into()));
                }
                TrigPolynomial::cos(k.clone())
            }
            ObservableSpec::Trig { dim, terms } => TrigPolynomial::new(
                *dim,
                terms
                    .iter()
                    .map(|t| (t.k.clone(), Complex64::new(t.re, t.im)))
                    .collect(),
            )?,
        };
        Ok(Observable::Trig(p))
    }
}

/// `start, start + step, …` up to `end` inclusive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

/// Largest grid a config may request.
const MAX_GRID: f64 = 5e7;

impl GridSpec {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        if !(self.step > 0.0 && self.end >= self.start && self.start.is_finite() && self.end.is_finite()) {
            return Err(CliError::Schema("grid needs finite start ≤ end and positive step".into()));
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor();
        if n > MAX_GRID {
            return Err(CliError::Schema(format!("grid has more than {MAX_GRID} points")));
        }
        Ok((0..=n as u64).map(|i| self.start + i as f64 * self.step).collect())
    }
}

pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(format!("config: {e}")))
}
