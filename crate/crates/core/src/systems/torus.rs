use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Basis, SymbolicReal};
use crate::error::{invalid, Error, Result};

/// Reduces `x` into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the unit circle `R/Z`.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(1.0 - d)
}

/// Max-over-coordinates circle distance on the torus.
pub fn torus_dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| circle_dist(a, b))
        .fold(0.0, f64::max)
}

/// Point of `T^n = R^n / Z^n` with every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        if coords.is_empty() {
            return Err(Error::EmptyInput("torus point"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point", "non-finite coordinate"));
        }
        Ok(Self(coords.into_iter().map(wrap).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Exact frequencies carried alongside their float renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactShadow {
    pub basis: Arc<Basis>,
    pub freqs: Vec<SymbolicReal>,
}

impl ExactShadow {
    pub fn new(basis: Arc<Basis>, freqs: Vec<SymbolicReal>) -> Result<Self> {
        basis.check_members(&freqs)?;
        Ok(Self { basis, freqs })
    }

    pub fn floats(&self) -> Result<Vec<f64>> {
        self.freqs.iter().map(|f| f.to_f64(&self.basis)).collect()
    }
}

/// Linear flow `T^t(p) = p + t·freqs (mod 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusFlow {
    freqs: Vec<f64>,
    shadow: Option<ExactShadow>,
}

impl TorusFlow {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        check_vector(&freqs, "freqs")?;
        Ok(Self {
            freqs,
            shadow: None,
        })
    }

    pub fn from_symbolic(basis: Arc<Basis>, freqs: Vec<SymbolicReal>) -> Result<Self> {
        let shadow = ExactShadow::new(basis, freqs)?;
        let floats = shadow.floats()?;
        check_vector(&floats, "freqs")?;
        Ok(Self {
            freqs: floats,
            shadow: Some(shadow),
        })
    }

    pub fn dim(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn shadow(&self) -> Option<&ExactShadow> {
        self.shadow.as_ref()
    }

    pub(crate) fn evolve_raw(&self, p: &[f64], t: f64) -> Vec<f64> {
        p.iter()
            .zip(&self.freqs)
            .map(|(&c, &w)| wrap(c + w * t))
            .collect()
    }
}

/// Rotation `T(p) = p + rotation (mod 1)`; `T^n` for integer `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMap {
    rotation: Vec<f64>,
    shadow: Option<ExactShadow>,
}

impl TorusMap {
    pub fn new(rotation: Vec<f64>) -> Result<Self> {
        check_vector(&rotation, "rotation")?;
        Ok(Self {
            rotation,
            shadow: None,
        })
    }

    pub fn from_symbolic(basis: Arc<Basis>, rotation: Vec<SymbolicReal>) -> Result<Self> {
        let shadow = ExactShadow::new(basis, rotation)?;
        let floats = shadow.floats()?;
        check_vector(&floats, "rotation")?;
        Ok(Self {
            rotation: floats,
            shadow: Some(shadow),
        })
    }

    pub fn dim(&self) -> usize {
        self.rotation.len()
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn shadow(&self) -> Option<&ExactShadow> {
        self.shadow.as_ref()
    }

    pub(crate) fn iterate_raw(&self, p: &[f64], n: i64) -> Vec<f64> {
        let n = n as f64;
        p.iter()
            .zip(&self.rotation)
            .map(|(&c, &w)| wrap(c + w * n))
            .collect()
    }
}

fn check_vector(v: &[f64], name: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyInput(name));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(invalid(name, "non-finite entry"));
    }
    Ok(())
}

/// Flow evaluation with dimension check.
pub fn torus_evolve(flow: &TorusFlow, p: &TorusPoint, t: f64) -> Result<TorusPoint> {
    if p.dim() != flow.dim() {
        return Err(Error::DimensionMismatch {
            expected: flow.dim(),
            got: p.dim(),
        });
    }
    Ok(TorusPoint(flow.evolve_raw(p.coords(), t)))
}
