use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default half-width of the interval credited to each hit time.
pub const DEFAULT_HIT_HALF_WIDTH: f64 = 0.05;

/// Samples of a real or complex function on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    grid: Vec<f64>,
    values: Vec<Complex64>,
}

impl TimeSeries {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid", "non-finite time"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "must be strictly increasing"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `φ` sampled on `grid`.
    pub fn sample(grid: Vec<f64>, phi: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.iter().map(|&t| phi(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.grid.first()?, *self.grid.last()?))
    }
}

/// `(1/ρ)∫_σ^{σ+ρ} |φ|` for one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowAverage {
    pub sigma: f64,
    pub rho: f64,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdReport {
    pub max: f64,
    pub table: Vec<WindowAverage>,
}

/// Trapezoid-rule primitive of `|φ|` on the grid, with linear
/// interpolation between nodes.
struct Primitive<'a> {
    grid: &'a [f64],
    abs: Vec<f64>,
    cum: Vec<f64>,
}

impl<'a> Primitive<'a> {
    fn new(s: &'a TimeSeries) -> Self {
        let abs: Vec<f64> = s.values.iter().map(|v| v.norm()).collect();
        let mut cum = Vec::with_capacity(abs.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..abs.len() {
            acc += 0.5 * (abs[i] + abs[i - 1]) * (s.grid[i] - s.grid[i - 1]);
            cum.push(acc);
        }
        Self {
            grid: &s.grid,
            abs,
            cum,
        }
    }

    fn at(&self, t: f64) -> f64 {
        let i = self.grid.partition_point(|&g| g <= t).saturating_sub(1);
        if i + 1 >= self.grid.len() {
            return self.cum[self.grid.len() - 1];
        }
        let (g0, g1) = (self.grid[i], self.grid[i + 1]);
        let v = self.abs[i] + (self.abs[i + 1] - self.abs[i]) * (t - g0) / (g1 - g0);
        self.cum[i] + 0.5 * (self.abs[i] + v) * (t - g0)
    }
}

/// Largest window average of `|φ|` over the given `(σ, ρ)` windows.
pub fn ud_sup(series: &TimeSeries, windows: &[(f64, f64)]) -> Result<UdReport> {
    if series.len() < 2 {
        return Err(Error::EmptyInput("time series"));
    }
    if windows.is_empty() {
        return Err(Error::EmptyInput("windows"));
    }
    let (lo, hi) = series.span().expect("non-empty");
    let slack = 1e-9 * (hi - lo).abs().max(1.0);
    let prim = Primitive::new(series);
    let mut table = Vec::with_capacity(windows.len());
    for &(sigma, rho) in windows {
        if !(rho > 0.0) || !sigma.is_finite() {
            return Err(invalid("window", "need finite σ and positive ρ"));
        }
        let end = sigma + rho;
        if sigma < lo - slack || end > hi + slack {
            return Err(Error::WindowOutOfRange { start: sigma, end });
        }
        let average = (prim.at(end.min(hi)) - prim.at(sigma.max(lo))) / rho;
        table.push(WindowAverage { sigma, rho, average });
    }
    let max = table.iter().map(|w| w.average).fold(0.0, f64::max);
    Ok(UdReport { max, table })
}

/// Windows `[σ, σ+ρ]` with `σ = from, from+step, …` inside the series span.
pub fn sweep_windows(series: &TimeSeries, from: f64, rho: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(rho > 0.0 && step > 0.0) {
        return Err(invalid("window", "need positive ρ and step"));
    }
    let (lo, hi) = series.span().ok_or(Error::EmptyInput("time series"))?;
    let start = from.max(lo);
    let count = ((hi - rho - start) / step + 1e-9).floor();
    if count < 0.0 {
        return Err(Error::WindowOutOfRange {
            start,
            end: start + rho,
        });
    }
    Ok((0..=count as u64).map(|i| (start + i as f64 * step, rho)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub lower: f64,
    pub upper: f64,
    pub windows: u64,
}

/// Lower and upper Banach density of the hit set, estimated by sliding
/// length-`ρ` windows over `[0, H]` at the given step.
///
/// Each hit `t` is credited with `[t − w, t + w] ∩ [0, H]`.
pub fn banach_density(hits: &[f64], horizon: f64, rho: f64, step: f64, half_width: f64) -> Result<DensityEstimate> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be positive"));
    }
    if !(step > 0.0) || !(half_width >= 0.0) {
        return Err(invalid("step", "step must be positive and half-width non-negative"));
    }
    if !(rho > 0.0) || rho > horizon {
        return Err(Error::EmptyInput("window range"));
    }
    if hits.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
        return Err(invalid("hits", "hit times must lie in [0, H]"));
    }
    let mut sorted = hits.to_vec();
    sorted.sort_by(f64::total_cmp);
    // disjoint union of hit intervals, with cumulative lengths
    let mut union: Vec<(f64, f64)> = Vec::new();
    for t in sorted {
        let (a, b) = ((t - half_width).max(0.0), (t + half_width).min(horizon));
        match union.last_mut() {
            Some((_, end)) if a <= *end => *end = end.max(b),
            _ => union.push((a, b)),
        }
    }
    let mut cum = Vec::with_capacity(union.len() + 1);
    cum.push(0.0);
    for (a, b) in &union {
        cum.push(cum.last().unwrap() + (b - a));
    }
    let measure_below = |s: f64| -> f64 {
        let i = union.partition_point(|&(a, _)| a < s);
        let mut m = cum[i];
        if i > 0 {
            let (a, b) = union[i - 1];
            m -= b - a;
            m += (s.min(b) - a).max(0.0);
        }
        m
    };
    let count = ((horizon - rho) / step + 1e-9).floor() as u64;
    let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
    for i in 0..=count {
        let s = i as f64 * step;
        let d = (measure_below(s + rho) - measure_below(s)) / rho;
        lower = lower.min(d);
        upper = upper.max(d);
    }
    Ok(DensityEstimate {
        lower,
        upper,
        windows: count + 1,
    })
}
