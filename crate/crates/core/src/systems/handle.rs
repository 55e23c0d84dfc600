use std::fmt;
use std::sync::Arc;

use super::heisenberg::{heis_base_dist, heis_dist, heis_reduce, HeisenbergElement, Nilflow};
use super::torus::{circle_dist, torus_dist, wrap, TorusFlow, TorusMap};
use crate::error::{invalid, Error, Result};
use crate::suspension::Suspension;

/// Integral-time tolerance for discrete systems.
pub const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemTag {
    TorusFlow,
    TorusMap,
    HeisenbergNilflow,
    HeisenbergNilsystem,
    Suspension,
}

impl SystemTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemTag::TorusFlow => "torus-flow",
            SystemTag::TorusMap => "torus-map",
            SystemTag::HeisenbergNilflow => "heisenberg-nilflow",
            SystemTag::HeisenbergNilsystem => "heisenberg-nilsystem",
            SystemTag::Suspension => "suspension",
        }
    }
}

impl serde::Serialize for SystemTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl fmt::Display for SystemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Underlying phase space together with its metric.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    Torus { dim: usize },
    Heisenberg,
    /// Unit-ceiling suspension over a discrete base.
    Suspension(Arc<SystemHandle>),
}

impl Space {
    pub fn point_dim(&self) -> usize {
        match self {
            Space::Torus { dim } => *dim,
            Space::Heisenberg => 3,
            Space::Suspension(base) => base.point_dim() + 1,
        }
    }

    /// Metric on canonical points.
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Space::Torus { .. } => torus_dist(p, q),
            Space::Heisenberg => heis_dist(
                &HeisenbergElement::from_slice(p),
                &HeisenbergElement::from_slice(q),
            ),
            Space::Suspension(base) => crate::suspension::susp_dist_raw(base, p, q),
        }
    }

    pub fn canonicalize(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.point_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.point_dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point", "non-finite coordinate"));
        }
        Ok(match self {
            Space::Torus { .. } => p.iter().map(|&c| wrap(c)).collect(),
            Space::Heisenberg => heis_reduce(&HeisenbergElement::from_slice(p)).0.to_vec(),
            Space::Suspension(base) => {
                let n = base.point_dim();
                let b = base.canonicalize(&p[..n])?;
                crate::suspension::susp_canonical_raw(base, &b, p[n])
            }
        })
    }

    /// True when every coordinate of `p` lies in `[0, 1)`.
    pub fn is_canonical(&self, p: &[f64]) -> bool {
        p.len() == self.point_dim() && p.iter().all(|c| (0.0..1.0).contains(c))
    }
}

/// One supported dynamical system.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemHandle {
    TorusFlow(TorusFlow),
    TorusMap(TorusMap),
    HeisenbergFlow(Nilflow),
    /// The time-one map of a nilflow, acting by integers.
    HeisenbergMap(Nilflow),
    Suspension(Suspension),
}

impl SystemHandle {
    pub fn tag(&self) -> SystemTag {
        match self {
            SystemHandle::TorusFlow(_) => SystemTag::TorusFlow,
            SystemHandle::TorusMap(_) => SystemTag::TorusMap,
            SystemHandle::HeisenbergFlow(_) => SystemTag::HeisenbergNilflow,
            SystemHandle::HeisenbergMap(_) => SystemTag::HeisenbergNilsystem,
            SystemHandle::Suspension(_) => SystemTag::Suspension,
        }
    }

    pub fn space(&self) -> Space {
        match self {
            SystemHandle::TorusFlow(f) => Space::Torus { dim: f.dim() },
            SystemHandle::TorusMap(m) => Space::Torus { dim: m.dim() },
            SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_) => Space::Heisenberg,
            SystemHandle::Suspension(s) => Space::Suspension(s.base().clone()),
        }
    }

    pub fn point_dim(&self) -> usize {
        match self {
            SystemHandle::TorusFlow(f) => f.dim(),
            SystemHandle::TorusMap(m) => m.dim(),
            SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_) => 3,
            SystemHandle::Suspension(s) => s.base().point_dim() + 1,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, SystemHandle::TorusMap(_) | SystemHandle::HeisenbergMap(_))
    }

    /// Torus rotations and flows act by isometries of the max metric.
    pub fn is_isometry(&self) -> bool {
        matches!(self, SystemHandle::TorusFlow(_) | SystemHandle::TorusMap(_))
    }

    /// Rejects non-integral times for discrete systems.
    pub fn check_time(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(invalid("t", "non-finite time"));
        }
        if self.is_discrete() {
            let r = t.round();
            if (t - r).abs() > TIME_TOL {
                return Err(Error::NonIntegralTime(t));
            }
            return Ok(r);
        }
        Ok(t)
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.point_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.point_dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point", "non-finite coordinate"));
        }
        Ok(())
    }

    pub fn canonicalize(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.space().canonicalize(p)
    }

    /// `T^t p` with argument checks.
    pub fn evolve(&self, p: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_point(p)?;
        let t = self.check_time(t)?;
        Ok(self.evolve_unchecked(p, t))
    }

    /// `T^t p` for a canonical `p`; discrete systems round `t`.
    pub fn evolve_unchecked(&self, p: &[f64], t: f64) -> Vec<f64> {
        match self {
            SystemHandle::TorusFlow(f) => f.evolve_raw(p, t),
            SystemHandle::TorusMap(m) => m.iterate_raw(p, t.round() as i64),
            SystemHandle::HeisenbergFlow(f) => {
                f.evolve(&HeisenbergElement::from_slice(p), t).to_vec()
            }
            SystemHandle::HeisenbergMap(f) => {
                f.evolve(&HeisenbergElement::from_slice(p), t.round()).to_vec()
            }
            SystemHandle::Suspension(s) => s.evolve_raw(p, t),
        }
    }

    /// Iterate of a discrete system, or the flow at an integer time.
    pub fn iterate(&self, p: &[f64], n: i64) -> Vec<f64> {
        self.evolve_unchecked(p, n as f64)
    }

    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            SystemHandle::TorusFlow(_) | SystemHandle::TorusMap(_) => torus_dist(p, q),
            SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_) => heis_dist(
                &HeisenbergElement::from_slice(p),
                &HeisenbergElement::from_slice(q),
            ),
            SystemHandle::Suspension(s) => s.dist_raw(p, q),
        }
    }

    /// Checked distance.
    pub fn metric_dist(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.dist(p, q))
    }

    /// A pseudo-distance `L ≤ dist` preserved by the action.
    ///
    /// Tori: the metric itself. Heisenberg: the `T²` factor metric.
    /// Suspension: circle distance of heights.
    pub fn invariant_lower_bound(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            SystemHandle::TorusFlow(_) | SystemHandle::TorusMap(_) => torus_dist(p, q),
            SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_) => heis_base_dist(
                &HeisenbergElement::from_slice(p),
                &HeisenbergElement::from_slice(q),
            ),
            SystemHandle::Suspension(_) => {
                circle_dist(*p.last().unwrap_or(&0.0), *q.last().unwrap_or(&0.0))
            }
        }
    }

    /// The time-`t` map of a flow as a discrete system.
    pub fn time_map(&self, t: f64) -> Result<SystemHandle> {
        if !t.is_finite() || t == 0.0 {
            return Err(invalid("t", "time must be finite and nonzero"));
        }
        match self {
            SystemHandle::TorusFlow(f) => Ok(SystemHandle::TorusMap(TorusMap::new(
                f.freqs().iter().map(|w| w * t).collect(),
            )?)),
            SystemHandle::HeisenbergFlow(f) => Ok(SystemHandle::HeisenbergMap(Nilflow::new(
                f.generator().pow(t),
            )?)),
            _ => Err(Error::UnsupportedSystem("time maps of non-flows")),
        }
    }

    pub fn torus_flow(freqs: Vec<f64>) -> Result<Self> {
        Ok(SystemHandle::TorusFlow(TorusFlow::new(freqs)?))
    }

    pub fn torus_map(rotation: Vec<f64>) -> Result<Self> {
        Ok(SystemHandle::TorusMap(TorusMap::new(rotation)?))
    }

    pub fn nilflow(generator: HeisenbergElement) -> Result<Self> {
        Ok(SystemHandle::HeisenbergFlow(Nilflow::new(generator)?))
    }

    pub fn nilsystem(generator: HeisenbergElement) -> Result<Self> {
        Ok(SystemHandle::HeisenbergMap(Nilflow::new(generator)?))
    }

    pub fn suspension(base: SystemHandle) -> Result<Self> {
        Ok(SystemHandle::Suspension(Suspension::new(base)?))
    }

    /// `T_g ∘ T_h` against `T_h ∘ T_g` at `p`.
    pub fn commutation_gap(&self, other: &SystemHandle, p: &[f64], s: f64, t: f64) -> f64 {
        let a = other.evolve_unchecked(&self.evolve_unchecked(p, s), t);
        let b = self.evolve_unchecked(&other.evolve_unchecked(p, t), s);
        self.dist(&a, &b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let s = SystemHandle::torus_map(vec![0.5]).unwrap();
        assert!((s.metric_dist(&[0.1], &[0.9]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(s.metric_dist(&[0.3], &[0.3]).unwrap(), 0.0);
        assert!(s.metric_dist(&[0.3, 0.1], &[0.3]).is_err());
    }

    #[test]
    fn discrete_systems_reject_fractional_times() {
        let s = SystemHandle::torus_map(vec![2f64.sqrt() - 1.0]).unwrap();
        assert!(matches!(s.evolve(&[0.0], 0.5), Err(Error::NonIntegralTime(_))));
        assert!(s.evolve(&[0.0], 3.0).is_ok());
        let f = SystemHandle::torus_flow(vec![1.0]).unwrap();
        assert!(f.evolve(&[0.0], 0.5).is_ok());
    }

    #[test]
    fn rational_rotation_is_isometric() {
        let s = SystemHandle::torus_map(vec![1.0 / 3.0, 0.25]).unwrap();
        let p = [0.1, 0.2];
        let q = [0.7, 0.9];
        for n in -5..5 {
            let d = s.dist(&s.iterate(&p, n), &s.iterate(&q, n));
            assert!((d - s.dist(&p, &q)).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_never_exceeds_metric() {
        let s = SystemHandle::nilsystem(HeisenbergElement::new(0.3, 0.6, 0.1)).unwrap();
        let p = [0.1, 0.95, 0.4];
        let q = [0.85, 0.05, 0.7];
        assert!(s.invariant_lower_bound(&p, &q) <= s.dist(&p, &q));
        let (a, b) = (s.iterate(&p, 7), s.iterate(&q, 7));
        assert!((s.invariant_lower_bound(&a, &b) - s.invariant_lower_bound(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn time_maps_commute_with_the_flow() {
        let f = SystemHandle::nilflow(HeisenbergElement::new(2f64.sqrt(), 3f64.sqrt(), 0.0)).unwrap();
        let g = f.time_map(1.0).unwrap();
        let h = f.time_map(2f64.sqrt()).unwrap();
        let p = [0.2, 0.4, 0.6];
        assert!(g.commutation_gap(&h, &p, 1.0, 1.0) < 1e-12);
    }
}
