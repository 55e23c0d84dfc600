//! Unit-ceiling suspension flow over a discrete system.
//!
//! Points are stored flat as `[base coordinates…, height]` with the height in
//! `[0, 1)`; `[x, 1]` is identified with `[Tx, 0]`.

use std::sync::Arc;

use serde::Serialize;

use crate::cloud::cell_coverage;
use crate::error::{invalid, Error, Result};
use crate::proximality::{rp_witness_search, SearchOptions, SearchOutcome};
use crate::systems::SystemHandle;

/// Tolerance for deciding that a height gap is an integer.
pub const INTEGRAL_GAP_TOL: f64 = 1e-12;
/// Base distance below which two points count as equal.
pub const EQUIV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Suspension {
    base: Arc<SystemHandle>,
}

impl Suspension {
    pub fn new(base: SystemHandle) -> Result<Self> {
        if !base.is_discrete() {
            return Err(Error::UnsupportedSystem("suspension over a flow"));
        }
        Ok(Self {
            base: Arc::new(base),
        })
    }

    pub fn base(&self) -> &Arc<SystemHandle> {
        &self.base
    }

    pub(crate) fn evolve_raw(&self, p: &[f64], t: f64) -> Vec<f64> {
        let n = self.base.point_dim();
        susp_canonical_raw(&self.base, &p[..n], p[n] + t)
    }

    pub(crate) fn dist_raw(&self, p: &[f64], q: &[f64]) -> f64 {
        susp_dist_raw(&self.base, p, q)
    }
}

/// `[T^⌊s⌋ x, s − ⌊s⌋]` flattened.
pub(crate) fn susp_canonical_raw(base: &SystemHandle, x: &[f64], s: f64) -> Vec<f64> {
    let f = s.floor();
    let mut h = s - f;
    let mut n = f as i64;
    if h >= 1.0 {
        h = 0.0;
        n += 1;
    }
    let mut out = if n == 0 {
        x.to_vec()
    } else {
        base.iterate(x, n)
    };
    out.push(h);
    out
}

fn directed(base: &SystemHandle, p: &[f64], q: &[f64]) -> f64 {
    let n = base.point_dim();
    let (pb, ps) = (&p[..n], p[n]);
    let (qb, qs) = (&q[..n], q[n]);
    let mut best = f64::INFINITY;
    for k in -1i64..=1 {
        let hk = (ps - k as f64 - qs).abs();
        if hk >= best {
            continue;
        }
        let moved;
        let pk = if k == 0 {
            pb
        } else {
            moved = base.iterate(pb, k);
            &moved
        };
        best = best.min(base.dist(pk, qb).max(hk));
    }
    best
}

pub(crate) fn susp_dist_raw(base: &SystemHandle, p: &[f64], q: &[f64]) -> f64 {
    directed(base, p, q).min(directed(base, q, p))
}

/// Canonical suspension point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspensionPoint {
    pub base: Vec<f64>,
    pub height: f64,
}

impl SuspensionPoint {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.base.clone();
        v.push(self.height);
        v
    }

    pub fn from_flat(p: &[f64]) -> Self {
        let (h, b) = p.split_last().expect("suspension point has a height");
        Self {
            base: b.to_vec(),
            height: *h,
        }
    }
}

fn check_base(base: &SystemHandle, x: &[f64], s: f64) -> Result<Vec<f64>> {
    if !base.is_discrete() {
        return Err(Error::UnsupportedSystem("suspension over a flow"));
    }
    if !s.is_finite() {
        return Err(invalid("height", "non-finite"));
    }
    base.canonicalize(x)
}

pub fn susp_canonical(base: &SystemHandle, x: &[f64], s: f64) -> Result<SuspensionPoint> {
    let x = check_base(base, x, s)?;
    Ok(SuspensionPoint::from_flat(&susp_canonical_raw(base, &x, s)))
}

/// `(x, s) ~ (y, t)` iff `s − t ∈ ℤ` and `T^{s−t} x = y`.
pub fn susp_equivalent(base: &SystemHandle, p: (&[f64], f64), q: (&[f64], f64)) -> Result<bool> {
    let x = check_base(base, p.0, p.1)?;
    let y = check_base(base, q.0, q.1)?;
    let gap = p.1 - q.1;
    let k = gap.round();
    if (gap - k).abs() > INTEGRAL_GAP_TOL {
        return Ok(false);
    }
    Ok(base.dist(&base.iterate(&x, k as i64), &y) <= EQUIV_TOL)
}

pub fn susp_evolve(base: &SystemHandle, p: &SuspensionPoint, t: f64) -> Result<SuspensionPoint> {
    let x = check_base(base, &p.base, p.height)?;
    if !t.is_finite() {
        return Err(invalid("t", "non-finite time"));
    }
    Ok(SuspensionPoint::from_flat(&susp_canonical_raw(
        base,
        &x,
        p.height + t,
    )))
}

/// Chart-window metric, symmetrized.
pub fn susp_metric(base: &SystemHandle, p: &SuspensionPoint, q: &SuspensionPoint) -> Result<f64> {
    check_base(base, &p.base, p.height)?;
    check_base(base, &q.base, q.height)?;
    Ok(susp_dist_raw(base, &p.to_flat(), &q.to_flat()))
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub forward: bool,
    /// `None` when the height gap is not integral and no base search ran.
    pub backward: Option<bool>,
    pub height_gap_integral: bool,
    /// `forward == (height_gap_integral && backward)`.
    pub agreement: bool,
    pub forward_outcome: &'static str,
    pub backward_outcome: Option<&'static str>,
    pub forward_candidates: u64,
    pub backward_candidates: u64,
}

/// Searches both sides of the suspension RP-transfer statement at `δ`.
#[allow(clippy::too_many_arguments)]
pub fn susp_rp_transfer_check(
    base: &SystemHandle,
    x1: &[f64],
    x2: &[f64],
    s1: f64,
    s2: f64,
    d: usize,
    delta: f64,
    budget: u64,
) -> Result<TransferReport> {
    let x1 = check_base(base, x1, s1)?;
    let x2 = check_base(base, x2, s2)?;
    let flow = SystemHandle::suspension(base.clone())?;
    let p = susp_canonical_raw(base, &x1, s1);
    let q = susp_canonical_raw(base, &x2, s2);
    let opts = SearchOptions::default();
    let fwd = rp_witness_search(&flow, &p, &q, d, delta, budget, &opts)?;
    let gap = s1 - s2;
    let k = gap.round();
    let integral = (gap - k).abs() <= INTEGRAL_GAP_TOL;
    let bwd = if integral {
        let moved = base.iterate(&x1, k as i64);
        Some(rp_witness_search(base, &moved, &x2, d, delta, budget, &opts)?)
    } else {
        None
    };
    let forward = fwd.is_found();
    let backward = bwd.as_ref().map(SearchOutcome::is_found);
    Ok(TransferReport {
        forward,
        backward,
        height_gap_integral: integral,
        agreement: forward == (integral && backward == Some(true)),
        forward_outcome: fwd.kind(),
        backward_outcome: bwd.as_ref().map(SearchOutcome::kind),
        forward_candidates: fwd.candidates(),
        backward_candidates: bwd.as_ref().map_or(0, SearchOutcome::candidates),
    })
}

/// Fill fraction of the base space by `{T^{⌊t⌋} x : t ∈ times}`.
pub fn integer_part_orbit(
    base: &SystemHandle,
    x: &[f64],
    times: &[f64],
    resolution: f64,
) -> Result<f64> {
    let x = check_base(base, x, 0.0)?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("times", "non-finite entry"));
    }
    let pts: Vec<Vec<f64>> = times
        .iter()
        .map(|t| base.iterate(&x, t.floor() as i64))
        .collect();
    cell_coverage(pts.iter().map(Vec::as_slice), base.point_dim(), resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{wrap, HeisenbergElement, TIME_TOL};
    use proptest::prelude::*;

    fn rot() -> SystemHandle {
        SystemHandle::torus_map(vec![2f64.sqrt()]).unwrap()
    }

    fn close(a: &SuspensionPoint, b: &SuspensionPoint, tol: f64) -> bool {
        (a.height - b.height).abs() <= tol
            && a.base.iter().zip(&b.base).all(|(u, v)| (u - v).abs() <= tol)
    }

    #[test]
    fn canonical_examples() {
        let t = rot();
        let x = [0.1];
        let tx = t.iterate(&x, 1);
        let c = susp_canonical(&t, &x, 1.0).unwrap();
        assert_eq!(c, SuspensionPoint { base: tx.clone(), height: 0.0 });
        assert_eq!(susp_canonical(&t, &x, 0.7).unwrap().base, x.to_vec());
        let c = susp_canonical(&t, &x, 2.5).unwrap();
        assert!(close(&c, &SuspensionPoint { base: t.iterate(&x, 2), height: 0.5 }, 1e-12));
        assert!(susp_equivalent(&t, (&x, 2.5), (&t.iterate(&x, 2), 0.5)).unwrap());
        assert!(!susp_equivalent(&t, (&x, 0.5), (&x, 0.6)).unwrap());
    }

    #[test]
    fn evolve_examples() {
        let t = rot();
        let p = SuspensionPoint { base: vec![0.3], height: 0.7 };
        assert_eq!(susp_evolve(&t, &p, 0.0).unwrap(), p);
        let q = susp_evolve(&t, &p, 0.5).unwrap();
        assert!(close(&q, &SuspensionPoint { base: t.iterate(&[0.3], 1), height: 0.2 }, 1e-12));
        let z = SuspensionPoint { base: vec![0.3], height: 0.0 };
        let r = susp_evolve(&t, &z, 7.0).unwrap();
        assert!(close(&r, &SuspensionPoint { base: t.iterate(&[0.3], 7), height: 0.0 }, 1e-12));
    }

    #[test]
    fn metric_glues_charts() {
        let t = rot();
        let x = vec![0.25];
        let p = SuspensionPoint { base: x.clone(), height: 0.99 };
        let q = SuspensionPoint { base: t.iterate(&x, 1), height: 0.01 };
        assert!(susp_metric(&t, &p, &q).unwrap() <= 0.02 + 1e-12);
        assert_eq!(susp_metric(&t, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn rejects_flow_bases() {
        let f = SystemHandle::torus_flow(vec![1.0]).unwrap();
        assert!(susp_canonical(&f, &[0.0], 0.5).is_err());
        assert!(SystemHandle::suspension(f).is_err());
    }

    #[test]
    fn integer_part_orbit_examples() {
        let t = rot();
        assert!((integer_part_orbit(&t, &[0.0], &[0.0], 0.05).unwrap() - 0.05).abs() < 1e-12);
        let third = SystemHandle::torus_map(vec![1.0 / 3.0]).unwrap();
        let times: Vec<f64> = (0..50).map(|k| 3.0 * k as f64).collect();
        let c = integer_part_orbit(&third, &[0.01], &times, 0.05).unwrap();
        assert!((c - 0.05).abs() < 1e-12);
        let times: Vec<f64> = (0..60).map(|k| k as f64).collect();
        let c = integer_part_orbit(&third, &[0.01], &times, 0.05).unwrap();
        assert!((c - 3.0 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn diagonal_transfer() {
        let t = rot();
        let r = susp_rp_transfer_check(&t, &[0.2], &[0.2], 0.4, 0.4, 1, 0.1, 10_000).unwrap();
        assert!(r.forward && r.backward == Some(true) && r.height_gap_integral && r.agreement);
    }

    #[test]
    fn non_integral_gap_is_obstructed() {
        let t = rot();
        let r = susp_rp_transfer_check(&t, &[0.2], &[0.2], 0.1, 0.5, 1, 0.1, 10_000).unwrap();
        assert!(!r.height_gap_integral && !r.forward && r.backward.is_none() && r.agreement);
        assert_eq!(r.forward_outcome, "proven-absent");
    }

    #[test]
    fn heisenberg_fiber_pair_transfers() {
        let base =
            SystemHandle::nilsystem(HeisenbergElement::new(2f64.sqrt(), 3f64.sqrt(), 0.0)).unwrap();
        let r = susp_rp_transfer_check(
            &base,
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.5],
            0.3,
            0.3,
            1,
            0.1,
            1_000_000,
        )
        .unwrap();
        assert!(r.forward, "{r:?}");
        assert_eq!(r.backward, Some(true));
        assert!(r.agreement);
    }

    proptest! {
        #[test]
        fn canonical_is_a_retraction(x in 0.0f64..1.0, s in -50.0f64..50.0) {
            let t = rot();
            let c = susp_canonical(&t, &[x], s).unwrap();
            let c2 = susp_canonical(&t, &c.base, c.height).unwrap();
            prop_assert!(close(&c, &c2, 1e-12));
            prop_assert!((0.0..1.0).contains(&c.height));
        }

        #[test]
        fn height_factor_is_equivariant(x in 0.0f64..1.0, s in 0.0f64..1.0, t in -100.0f64..100.0) {
            let sys = rot();
            let p = SuspensionPoint { base: vec![x], height: s };
            let q = susp_evolve(&sys, &p, t).unwrap();
            prop_assert_eq!(q.height, wrap(s + t));
        }

        #[test]
        fn integer_sampling_recovers_base(x in 0.0f64..1.0, n in -1000i64..1000) {
            let sys = rot();
            let p = SuspensionPoint { base: vec![x], height: 0.0 };
            let q = susp_evolve(&sys, &p, n as f64).unwrap();
            prop_assert!(q.height.abs() <= TIME_TOL);
            prop_assert!(sys.dist(&q.base, &sys.iterate(&[x], n)) <= 1e-10);
        }

        #[test]
        fn flow_law(x in 0.0f64..1.0, h in 0.0f64..1.0, s in -1000.0f64..1000.0, t in -1000.0f64..1000.0) {
            let sys = rot();
            let flow = SystemHandle::suspension(sys.clone()).unwrap();
            let p = vec![x, h];
            let a = flow.evolve_unchecked(&flow.evolve_unchecked(&p, s), t);
            let b = flow.evolve_unchecked(&p, s + t);
            prop_assert!(flow.dist(&a, &b) <= 1e-10);
        }

        #[test]
        fn metric_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let sys = rot();
            let p = SuspensionPoint { base: vec![a], height: s };
            let q = SuspensionPoint { base: vec![b], height: t };
            let d1 = susp_metric(&sys, &p, &q).unwrap();
            let d2 = susp_metric(&sys, &q, &p).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12);
        }

        #[test]
        fn equivalence_relation(x in 0.0f64..1.0, s in -3.0f64..3.0, j in -3i64..3, k in -3i64..3) {
            let sys = rot();
            let y = sys.iterate(&[x], j);
            let z = sys.iterate(&[x], k);
            let p = (&[x][..], s);
            let q = (y.as_slice(), s - j as f64);
            let r = (z.as_slice(), s - k as f64);
            prop_assert!(susp_equivalent(&sys, p, p).unwrap());
            let pq = susp_equivalent(&sys, p, q).unwrap();
            prop_assert_eq!(pq, susp_equivalent(&sys, q, p).unwrap());
            if pq && susp_equivalent(&sys, q, r).unwrap() {
                prop_assert!(susp_equivalent(&sys, p, r).unwrap());
            }
        }
    }
}
