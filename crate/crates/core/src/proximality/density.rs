//! Coverage of polynomial orbits and fibers, and return-time sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cube::check_alphas;
use crate::algebra::Polynomial;
use crate::cloud::CellGrid;
use crate::error::{invalid, Error, Result};
use crate::systems::{circle_dist, wrap, SystemHandle};

/// Evenly spaced midpoints of `[0, horizon]`.
fn time_grid(horizon: f64, n: u64) -> impl IndexedParallelIterator<Item = f64> {
    let step = horizon / n as f64;
    (0..n as usize).into_par_iter().map(move |j| (j as f64 + 0.5) * step)
}

fn check_budget(budget: u64, resolution: f64, horizon: f64) -> Result<()> {
    if budget == 0 {
        return Err(invalid("budget", "must be positive"));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(invalid("resolution", "must lie in (0, 1]"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be positive"));
    }
    Ok(())
}

/// Fraction of resolution cells of `X^d` hit by `(T^{p_1(t)} x, …, T^{p_d(t)} x)`
/// over `budget` evenly spaced `t ∈ [0, horizon]`.
pub fn poly_orbit_density(
    sys: &SystemHandle,
    polys: &[Polynomial],
    x: &[f64],
    budget: u64,
    resolution: f64,
    horizon: f64,
) -> Result<f64> {
    if polys.is_empty() {
        return Err(Error::EmptyInput("polynomials"));
    }
    if polys.iter().any(Polynomial::is_constant) {
        return Err(invalid("polys", "every polynomial must be nonconstant"));
    }
    if sys.is_discrete() {
        return Err(Error::UnsupportedSystem("polynomial times on a discrete system"));
    }
    check_budget(budget, resolution, horizon)?;
    sys.check_point(x)?;
    let x = sys.canonicalize(x)?;
    let mut grid = CellGrid::new(polys.len() * x.len(), resolution)?;
    let keys: Vec<u128> = time_grid(horizon, budget)
        .map(|t| {
            let row: Vec<f64> = polys
                .iter()
                .flat_map(|p| sys.evolve_unchecked(&x, p.eval(t)))
                .collect();
            grid.key(&row)
        })
        .collect();
    for k in keys {
        grid.mark_key(k);
    }
    Ok(grid.coverage())
}

/// Built-in factor maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Projection {
    Identity,
    /// `(x, y, z) ↦ (x, y)` on the Heisenberg nilmanifold.
    HeisenbergToBase,
    /// Keeps the listed torus coordinates.
    TorusCoordinates { keep: Vec<usize> },
}

/// Splits a canonical point into (factor coordinates, fiber coordinates)
/// relative to the fiber through `x`.
fn split(proj: &Projection, sys: &SystemHandle, x: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match proj {
        Projection::Identity => (p.to_vec(), Vec::new()),
        Projection::HeisenbergToBase => {
            // the chart p·(0, n, 0) puts the y-coordinate nearest to π(x)
            let n = (x[1] - p[1]).round();
            let z = wrap(p[2] + p[0] * n);
            (vec![p[0], p[1]], vec![z])
        }
        Projection::TorusCoordinates { keep } => {
            let base = keep.iter().map(|&i| p[i]).collect();
            let fiber = (0..sys.point_dim())
                .filter(|i| !keep.contains(i))
                .map(|i| p[i])
                .collect();
            (base, fiber)
        }
    }
}

fn check_projection(proj: &Projection, sys: &SystemHandle) -> Result<()> {
    match proj {
        Projection::Identity => Ok(()),
        Projection::HeisenbergToBase => match sys {
            SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_) => Ok(()),
            _ => Err(Error::UnsupportedProjection),
        },
        Projection::TorusCoordinates { keep } => match sys {
            SystemHandle::TorusFlow(_) | SystemHandle::TorusMap(_) => {
                let n = sys.point_dim();
                let mut seen = vec![false; n];
                for &i in keep {
                    if i >= n || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::UnsupportedProjection);
                    }
                }
                Ok(())
            }
            _ => Err(Error::UnsupportedProjection),
        },
    }
}

/// Fraction of resolution cells of `(π^{-1}(π x))^d` entered by the diagonal
/// orbit `(T^{α_1 t} x, …, T^{α_d t} x)`.
///
/// A sample counts when every entry's factor coordinates lie within
/// `resolution / 2` of `π(x)`; its fiber coordinates then mark one cell.
#[allow(clippy::too_many_arguments)]
pub fn fiber_coverage(
    sys: &SystemHandle,
    proj: &Projection,
    alphas: &[f64],
    x: &[f64],
    budget: u64,
    resolution: f64,
    horizon: f64,
) -> Result<f64> {
    check_projection(proj, sys)?;
    check_alphas(sys, alphas)?;
    check_budget(budget, resolution, horizon)?;
    sys.check_point(x)?;
    let x = sys.canonicalize(x)?;
    let (bx, fx) = split(proj, sys, &x, &x);
    let d = alphas.len();
    let fdim = fx.len();
    let tol = resolution / 2.0;
    let times: Vec<f64> = if sys.is_discrete() {
        (0..budget).map(|j| j as f64).collect()
    } else {
        time_grid(horizon, budget).collect()
    };
    let hits: Vec<Vec<f64>> = times
        .par_iter()
        .filter_map(|&t| {
            let mut fiber = Vec::with_capacity(d * fdim);
            for a in alphas {
                let p = sys.evolve_unchecked(&x, a * t);
                let (b, f) = split(proj, sys, &x, &p);
                if b.iter().zip(&bx).any(|(u, v)| circle_dist(*u, *v) > tol) {
                    return None;
                }
                fiber.extend(f);
            }
            Some(fiber)
        })
        .collect();
    if fdim == 0 {
        return Ok(if hits.is_empty() { 0.0 } else { 1.0 });
    }
    let mut grid = CellGrid::new(d * fdim, resolution)?;
    for h in &hits {
        grid.mark(h);
    }
    Ok(grid.coverage())
}

/// Grid times `t` with `dist(T^t x, center) < radius`.
pub fn return_set(
    sys: &SystemHandle,
    x: &[f64],
    center: &[f64],
    radius: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    sys.check_point(x)?;
    sys.check_point(center)?;
    let x = sys.canonicalize(x)?;
    let center = sys.canonicalize(center)?;
    for &t in grid {
        sys.check_time(t)?;
    }
    Ok(grid
        .par_iter()
        .copied()
        .filter(|&t| sys.dist(&sys.evolve_unchecked(&x, t), &center) < radius)
        .collect())
}

/// First grid time in `R(x, B(y, radius)) ∩ R(y0, B(y0, radius0)) ∩ [0, horizon]`.
#[allow(clippy::too_many_arguments)]
pub fn rp_return_first(
    sys: &SystemHandle,
    x: &[f64],
    y: &[f64],
    d: usize,
    radius: f64,
    nil: &SystemHandle,
    y0: &[f64],
    radius0: f64,
    horizon: f64,
    step: f64,
) -> Result<Option<f64>> {
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    if !matches!(nil, SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_) | SystemHandle::TorusFlow(_) | SystemHandle::TorusMap(_)) {
        return Err(Error::UnsupportedSystem("return probe against a non-nilpotent system"));
    }
    if !(radius > 0.0 && radius0 > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    if !(step > 0.0 && horizon >= 0.0 && horizon.is_finite()) {
        return Err(invalid("grid_step", "must be positive with a finite horizon"));
    }
    for (s, p) in [(sys, x), (sys, y), (nil, y0)] {
        s.check_point(p)?;
    }
    let (x, y) = (sys.canonicalize(x)?, sys.canonicalize(y)?);
    let y0 = nil.canonicalize(y0)?;
    let n = (horizon / step).floor() as u64;
    let discrete = sys.is_discrete() || nil.is_discrete();
    Ok((0..=n)
        .into_par_iter()
        .map(|k| k as f64 * step)
        .filter(|t| !discrete || t.fract() == 0.0)
        .find_first(|&t| {
            sys.dist(&sys.evolve_unchecked(&x, t), &y) < radius
                && nil.dist(&nil.evolve_unchecked(&y0, t), &y0) < radius0
        }))
}

/// Whether the two return-time sets meet on the grid `{0, step, …, horizon}`.
#[allow(clippy::too_many_arguments)]
pub fn rp_return_intersection(
    sys: &SystemHandle,
    x: &[f64],
    y: &[f64],
    d: usize,
    radius: f64,
    nil: &SystemHandle,
    y0: &[f64],
    radius0: f64,
    horizon: f64,
    step: f64,
) -> Result<bool> {
    Ok(rp_return_first(sys, x, y, d, radius, nil, y0, radius0, horizon, step)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::HeisenbergElement;

    fn heis_flow() -> SystemHandle {
        SystemHandle::nilflow(HeisenbergElement::new(2f64.sqrt(), 3f64.sqrt(), 0.0)).unwrap()
    }

    #[test]
    fn single_linear_polynomial_fills_circle() {
        let f = SystemHandle::torus_flow(vec![2f64.sqrt()]).unwrap();
        let c = poly_orbit_density(&f, &[Polynomial::identity()], &[0.0], 1_000_000, 0.01, 1e3)
            .unwrap();
        assert!(c >= 0.99);
    }

    #[test]
    fn dependent_polynomials_stay_on_a_line() {
        let f = SystemHandle::torus_flow(vec![1.0]).unwrap();
        let p = [Polynomial::identity(), Polynomial::from_i64(&[0, 2])];
        let c = poly_orbit_density(&f, &p, &[0.0], 200_000, 0.05, 1e3).unwrap();
        assert!(c < 0.5);
        let q = [Polynomial::identity(), Polynomial::from_i64(&[0, 0, 1])];
        assert!(poly_orbit_density(&f, &q, &[0.0], 1_000_000, 0.05, 1e3).unwrap() >= 0.95);
        assert!(poly_orbit_density(&f, &[Polynomial::from_i64(&[1])], &[0.0], 10, 0.05, 1.0).is_err());
    }

    #[test]
    fn identity_projection_single_cell() {
        let f = SystemHandle::torus_flow(vec![2f64.sqrt()]).unwrap();
        let c = fiber_coverage(&f, &Projection::Identity, &[1.0], &[0.3], 1000, 0.05, 10.0).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn heisenberg_fiber_fills() {
        let c = fiber_coverage(
            &heis_flow(),
            &Projection::HeisenbergToBase,
            &[1.0],
            &[0.5, 0.5, 0.0],
            1_000_000,
            0.05,
            1e5,
        )
        .unwrap();
        assert!(c >= 0.95, "{c}");
    }

    #[test]
    fn torus_coordinate_fiber_fills() {
        let f = SystemHandle::torus_flow(vec![2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let proj = Projection::TorusCoordinates { keep: vec![0] };
        let c = fiber_coverage(&f, &proj, &[1.0], &[0.5, 0.5], 200_000, 0.05, 2e4).unwrap();
        assert!(c >= 0.95, "{c}");
        let bad = Projection::TorusCoordinates { keep: vec![3] };
        assert_eq!(
            fiber_coverage(&f, &bad, &[1.0], &[0.5, 0.5], 10, 0.05, 1.0),
            Err(Error::UnsupportedProjection)
        );
        assert_eq!(
            fiber_coverage(&f, &Projection::HeisenbergToBase, &[1.0], &[0.5, 0.5], 10, 0.05, 1.0),
            Err(Error::UnsupportedProjection)
        );
    }

    #[test]
    fn return_set_examples() {
        let f = SystemHandle::torus_flow(vec![1.0]).unwrap();
        let grid: Vec<f64> = (0..1000).map(|k| k as f64 * 0.01).collect();
        let r = return_set(&f, &[0.2], &[0.2], 0.1, &grid).unwrap();
        assert!(r.contains(&0.0));
        for &t in &grid {
            let gap = circle_dist(t, 0.0);
            if (gap - 0.1).abs() > 1e-9 {
                assert_eq!(r.contains(&t), gap < 0.1, "t = {t}");
            }
        }
        let wider = return_set(&f, &[0.2], &[0.2], 0.2, &grid).unwrap();
        assert!(r.iter().all(|t| wider.contains(t)));
    }

    #[test]
    fn minimal_rotation_returns_are_syndetic() {
        let m = SystemHandle::torus_map(vec![2f64.sqrt()]).unwrap();
        let grid: Vec<f64> = (0..10_000).map(f64::from).collect();
        let r = return_set(&m, &[0.0], &[0.0], 0.05, &grid).unwrap();
        let max_gap = r.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(max_gap <= 30.0, "{max_gap}");
    }

    #[test]
    fn return_intersections() {
        let h = heis_flow();
        let x = [0.0, 0.0, 0.0];
        assert!(rp_return_intersection(&h, &x, &x, 1, 0.1, &h, &[0.3, 0.6, 0.2], 0.1, 10.0, 0.01).unwrap());
        let y = [0.0, 0.0, 0.5];
        assert!(
            rp_return_intersection(&h, &x, &y, 2, 0.1, &h, &[0.3, 0.6, 0.2], 0.1, 1e4, 0.01).unwrap()
        );
        let r = SystemHandle::torus_map(vec![2f64.sqrt()]).unwrap();
        let s = SystemHandle::torus_map(vec![3f64.sqrt()]).unwrap();
        assert!(rp_return_intersection(&r, &[0.0], &[0.4], 1, 0.01, &s, &[0.1], 0.05, 1e4, 1.0).unwrap());
    }
}
