//! Samples of dynamical cubes `Q^[d]` and of the sets `N_d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::witness::face_times;
use crate::cloud::{PointCloud, Provenance};
use crate::error::{invalid, Error, Result};
use crate::systems::SystemHandle;

/// Default range `[−N, N]` for sampled group elements.
pub const DEFAULT_HORIZON: f64 = 1e6;

fn draw(rng: &mut ChaCha8Rng, discrete: bool, horizon: f64) -> f64 {
    if discrete {
        let n = horizon as i64;
        rng.random_range(-n..=n) as f64
    } else {
        rng.random_range(-horizon..=horizon)
    }
}

fn check(sys: &SystemHandle, x: &[f64], d: usize, budget: u64, horizon: f64) -> Result<Vec<f64>> {
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    if d > 12 {
        return Err(invalid("d", "cube arity 2^d too large"));
    }
    if budget == 0 {
        return Err(invalid("budget", "must be positive"));
    }
    if !(horizon >= 1.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be at least 1"));
    }
    sys.check_point(x)?;
    sys.canonicalize(x)
}

/// `budget` samples of `(g^(ε) x)_{ε ∈ {0,1}^d}` with `g_1, …, g_d` drawn from
/// `[−horizon, horizon]`; sample 0 uses the identity tuple.
pub fn cube_orbit_sample(
    sys: &SystemHandle,
    x: &[f64],
    d: usize,
    budget: u64,
    seed: u64,
    horizon: f64,
) -> Result<PointCloud> {
    let x = check(sys, x, d, budget, horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discrete = sys.is_discrete();
    let gs: Vec<Vec<f64>> = (0..budget)
        .map(|k| {
            if k == 0 {
                vec![0.0; d]
            } else {
                (0..d).map(|_| draw(&mut rng, discrete, horizon)).collect()
            }
        })
        .collect();
    let data: Vec<f64> = gs
        .par_iter()
        .flat_map_iter(|g| {
            let mut row = x.clone();
            for t in face_times(g) {
                row.extend(sys.evolve_unchecked(&x, t));
            }
            row
        })
        .collect();
    PointCloud::new(
        sys.space(),
        1 << d,
        data,
        Provenance {
            system: sys.tag(),
            operation: "cube".into(),
            budget,
            seed,
        },
    )
}

/// Distinct nonzero multipliers; integers for discrete systems.
pub fn check_alphas(sys: &SystemHandle, alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("alphas"));
    }
    for (i, a) in alphas.iter().enumerate() {
        if !a.is_finite() || *a == 0.0 || alphas[..i].contains(a) {
            return Err(Error::RepeatedAlphas);
        }
        if sys.is_discrete() && a.fract() != 0.0 {
            return Err(invalid("alphas", "discrete systems need integer multipliers"));
        }
    }
    Ok(())
}

/// `budget` samples of `(T^{α_1 n} x', …, T^{α_d n} x')` with `x' = T^m x`;
/// `α` defaults to `(1, 2, …, d)` and sample 0 uses `m = n = 0`.
pub fn nd_sample(
    sys: &SystemHandle,
    x: &[f64],
    d: usize,
    budget: u64,
    seed: u64,
    alphas: Option<&[f64]>,
    horizon: f64,
) -> Result<PointCloud> {
    let x = check(sys, x, d, budget, horizon)?;
    let alphas: Vec<f64> = match alphas {
        Some(a) if a.len() != d => {
            return Err(Error::ArityMismatch {
                expected: d,
                got: a.len(),
            })
        }
        Some(a) => a.to_vec(),
        None => (1..=d).map(|k| k as f64).collect(),
    };
    check_alphas(sys, &alphas)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discrete = sys.is_discrete();
    let mn: Vec<(f64, f64)> = (0..budget)
        .map(|k| {
            if k == 0 {
                (0.0, 0.0)
            } else {
                (draw(&mut rng, discrete, horizon), draw(&mut rng, discrete, horizon))
            }
        })
        .collect();
    let data: Vec<f64> = mn
        .par_iter()
        .flat_map_iter(|&(m, n)| {
            let base = sys.evolve_unchecked(&x, m);
            alphas
                .iter()
                .flat_map(|a| sys.evolve_unchecked(&base, a * n))
                .collect::<Vec<_>>()
        })
        .collect();
    PointCloud::new(
        sys.space(),
        d,
        data,
        Provenance {
            system: sys.tag(),
            operation: "nd".into(),
            budget,
            seed,
        },
    )
}
