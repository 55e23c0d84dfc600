//! The 3-dimensional Heisenberg group in Malcev coordinates, its integer
//! lattice, and the nilflow `gΓ ↦ a^t·gΓ` on the quotient.
//!
//! Group law: `(x,y,z)·(x',y',z') = (x+x', y+y', z+z'+x·y')`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dd::Dd;
use super::torus::{circle_dist, ExactShadow};
use crate::algebra::{Basis, SymbolicReal};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeisenbergElement {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HeisenbergElement {
    pub const IDENTITY: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn central(z: f64) -> Self {
        Self::new(0.0, 0.0, z)
    }

    pub fn from_slice(c: &[f64]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z + self.x * o.y)
    }

    pub fn inverse(&self) -> Self {
        Self::new(-self.x, -self.y, -self.z + self.x * self.y)
    }

    /// `a^t = exp(t log a)`: `(t·x, t·y, t·z + t(t-1)/2·x·y)`.
    pub fn pow(&self, t: f64) -> Self {
        Self::new(
            t * self.x,
            t * self.y,
            t * self.z + 0.5 * t * (t - 1.0) * self.x * self.y,
        )
    }

    /// `h·self·h⁻¹`
    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.mul(self).mul(&h.inverse())
    }

    /// Largest coordinate difference.
    pub fn max_gap(&self, o: &Self) -> f64 {
        (self.x - o.x)
            .abs()
            .max((self.y - o.y).abs())
            .max((self.z - o.z).abs())
    }

    pub fn is_central(&self, tol: f64) -> bool {
        self.x.abs() <= tol && self.y.abs() <= tol
    }
}

pub fn heis_multiply(a: &HeisenbergElement, b: &HeisenbergElement) -> HeisenbergElement {
    a.mul(b)
}

pub fn heis_power(a: &HeisenbergElement, t: f64) -> HeisenbergElement {
    a.pow(t)
}

/// Gap between `h·a^t·h⁻¹` and `(h·a·h⁻¹)^t`, computed independently.
pub fn heis_conjugate_power_identity(
    a: &HeisenbergElement,
    h: &HeisenbergElement,
    t: f64,
) -> f64 {
    let lhs = a.pow(t).conjugate_by(h);
    let rhs = a.conjugate_by(h).pow(t);
    lhs.max_gap(&rhs)
}

/// Element `(m, n, k)` of the integer lattice `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LatticeElement {
    pub m: i64,
    pub n: i64,
    pub k: i64,
}

impl LatticeElement {
    pub fn to_element(self) -> HeisenbergElement {
        HeisenbergElement::new(self.m as f64, self.n as f64, self.k as f64)
    }

    pub fn inverse(self) -> Self {
        // (−m, −n, −k + m·n)
        Self {
            m: -self.m,
            n: -self.n,
            k: -self.k + self.m * self.n,
        }
    }
}

fn floor_frac(v: f64) -> (f64, f64) {
    let f = v.floor();
    let r = v - f;
    if r >= 1.0 {
        (0.0, f + 1.0)
    } else {
        (r, f)
    }
}

/// Canonical coset representative `g·γ ∈ [0,1)^3` and the lattice element `γ`.
///
/// `m = −⌊x⌋` first, then `n = −⌊y⌋`, then `k` brings the central coordinate
/// `z + x·n + k` into `[0,1)`.
pub fn heis_reduce(g: &HeisenbergElement) -> (HeisenbergElement, LatticeElement) {
    let (cx, fx) = floor_frac(g.x);
    let (cy, fy) = floor_frac(g.y);
    let n = -fy;
    let (cz, fz) = floor_frac(g.z + g.x * n);
    let gamma = LatticeElement {
        m: -fx as i64,
        n: n as i64,
        k: -fz as i64,
    };
    (HeisenbergElement::new(cx, cy, cz), gamma)
}

/// Nilflow on `H/Γ` generated by `a`, optionally carrying exact `(α, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nilflow {
    generator: HeisenbergElement,
    shadow: Option<ExactShadow>,
}

impl Nilflow {
    pub fn new(generator: HeisenbergElement) -> Result<Self> {
        if !generator.is_finite() {
            return Err(invalid("generator", "non-finite coordinate"));
        }
        Ok(Self {
            generator,
            shadow: None,
        })
    }

    /// Generator from exact coordinates; `(α, β) = (x, y)` becomes the shadow.
    pub fn from_symbolic(basis: Arc<Basis>, coords: [SymbolicReal; 3]) -> Result<Self> {
        let [x, y, z] = coords;
        let zf = z.to_f64(&basis)?;
        let shadow = ExactShadow::new(basis, vec![x, y])?;
        let base = shadow.floats()?;
        let mut flow = Self::new(HeisenbergElement::new(base[0], base[1], zf))?;
        flow.shadow = Some(shadow);
        Ok(flow)
    }

    pub fn generator(&self) -> &HeisenbergElement {
        &self.generator
    }

    pub fn shadow(&self) -> Option<&ExactShadow> {
        self.shadow.as_ref()
    }

    /// Base rotation frequencies `(α, β)` of the factor map to `T²`.
    pub fn base_freqs(&self) -> [f64; 2] {
        [self.generator.x, self.generator.y]
    }

    /// `heis_reduce(a^t · p)` evaluated in double-double precision.
    pub fn evolve(&self, p: &HeisenbergElement, t: f64) -> HeisenbergElement {
        let a = &self.generator;
        let tx = Dd::prod(t, a.x);
        let ty = Dd::prod(t, a.y);
        let big_x = tx.add_f64(p.x);
        let big_y = ty.add_f64(p.y);
        // t(t−1)/2
        let tm1 = Dd::from_f64(t).add_f64(-1.0);
        let c = tm1.mul_f64(t).scale_pow2(0.5);
        let z = Dd::prod(t, a.z)
            .add(c.mul(Dd::prod(a.x, a.y)))
            .add_f64(p.z)
            .add(tx.mul_f64(p.y));
        let (cx, _) = big_x.split_floor();
        let (cy, fy) = big_y.split_floor();
        let n = -fy;
        let z = z.add(big_x.mul_f64(n));
        let (cz, _) = z.split_floor();
        HeisenbergElement::new(cx, cy, cz)
    }
}

/// Time-`t` evolution of a canonical point.
pub fn nil_evolve(flow: &Nilflow, p: &HeisenbergElement, t: f64) -> HeisenbergElement {
    flow.evolve(p, t)
}

/// Lattice translates scanned by the quotient metric: `{−2,…,2}^3`.
pub const LATTICE_WINDOW: i64 = 2;

/// `min_γ |p − q·γ|` over the window, Euclidean in Malcev coordinates.
///
/// Separable: the `x` term depends only on `m`, and for fixed `n` the best `k`
/// is the nearest integer to the central gap (clamped to the window).
pub fn heis_directed_dist(p: &HeisenbergElement, q: &HeisenbergElement) -> f64 {
    let w = LATTICE_WINDOW as f64;
    let dx = p.x - q.x;
    let mx = dx.round().clamp(-w, w);
    let ex = (dx - mx) * (dx - mx);
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    let mut best = f64::INFINITY;
    for n in -LATTICE_WINDOW..=LATTICE_WINDOW {
        let n = n as f64;
        let ey = (dy - n) * (dy - n);
        if ey >= best {
            continue;
        }
        let g = dz - q.x * n;
        let k = g.round().clamp(-w, w);
        let e = ey + (g - k) * (g - k);
        if e < best {
            best = e;
        }
    }
    (ex + best).sqrt()
}

/// Symmetrized lattice-window metric on `H/Γ`.
pub fn heis_dist(p: &HeisenbergElement, q: &HeisenbergElement) -> f64 {
    heis_directed_dist(p, q).min(heis_directed_dist(q, p))
}

/// Distance of the images in the `T²` factor; never exceeds [`heis_dist`].
pub fn heis_base_dist(p: &HeisenbergElement, q: &HeisenbergElement) -> f64 {
    circle_dist(p.x, q.x).max(circle_dist(p.y, q.y))
}
