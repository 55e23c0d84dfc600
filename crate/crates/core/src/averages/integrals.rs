use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::observable::{check_observable, e, Observable, TrigPolynomial};
use super::uniform::TimeSeries;
use crate::error::{invalid, Error, Result};
use crate::systems::SystemHandle;

/// Monte-Carlo samples per independently seeded batch.
const BATCH: u64 = 4096;

/// Largest rectangle-rule grid used for exact torus quadrature.
const MAX_GRID_POINTS: u64 = 1 << 22;

/// Value of an integral with its standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: Complex64,
    pub stderr: f64,
    pub samples: u64,
    pub exact: bool,
}

impl Estimate {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples: 0,
            exact: true,
        }
    }

    /// Whether `other` lies within `k` standard errors of this estimate.
    pub fn agrees(&self, other: Complex64, k: f64) -> bool {
        (self.value - other).norm() <= k * self.stderr + 1e-12
    }
}

/// Mean of `g` over `n` uniform points of `[0,1)^dim`.
///
/// Batch `b` draws from stream `b` of the seeded generator, so the result
/// does not depend on how batches are scheduled.
pub fn monte_carlo<G>(dim: usize, n: u64, seed: u64, g: G) -> Result<Estimate>
where
    G: Fn(&[f64]) -> Complex64 + Sync,
{
    if n < 2 {
        return Err(invalid("n_samples", "need at least 2 samples"));
    }
    let batches = n.div_ceil(BATCH);
    let partial: Vec<(Complex64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BATCH.min(n - b * BATCH);
            let mut x = vec![0.0; dim];
            let mut sum = Complex64::default();
            let mut sq = 0.0;
            for _ in 0..count {
                x.iter_mut().for_each(|c| *c = rng.random::<f64>());
                let v = g(&x);
                sum += v;
                sq += v.norm_sqr();
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = partial
        .iter()
        .fold((Complex64::default(), 0.0), |(s, q), (a, b)| (s + a, q + b));
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sq / nf - mean.norm_sqr()) * nf / (nf - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        stderr: (var / nf).sqrt(),
        samples: n,
        exact: false,
    })
}

/// Haar integral of `f` on the phase space of `sys`.
///
/// Haar measure is Lebesgue measure on the fundamental domain for every
/// supported space, so trig observables integrate exactly everywhere.
pub fn integrate_haar(sys: &SystemHandle, f: &Observable, n_samples: u64, seed: u64) -> Result<Estimate> {
    check_observable(sys, f)?;
    match f {
        Observable::Trig(p) => Ok(Estimate::exact(p.integral())),
        Observable::Callback { .. } => monte_carlo(sys.point_dim(), n_samples, seed, |x| f.eval(x)),
    }
}

fn check_multipliers(sys: &SystemHandle, alphas: &[f64], t: f64) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::EmptyInput("alphas"));
    }
    for (i, a) in alphas.iter().enumerate() {
        if !a.is_finite() || *a == 0.0 {
            return Err(invalid("alphas", "multipliers must be finite and nonzero"));
        }
        if alphas[..i].contains(a) {
            return Err(Error::RepeatedAlphas);
        }
        sys.check_time(a * t)?;
    }
    Ok(())
}

/// Rotation vector seen by `f`, when `I_f` reduces to torus bookkeeping.
fn exact_frequencies(sys: &SystemHandle, f: &Observable) -> Option<Vec<f64>> {
    let p = f.as_trig()?;
    match sys {
        SystemHandle::TorusFlow(flow) => Some(flow.freqs().to_vec()),
        SystemHandle::TorusMap(map) => Some(map.rotation().to_vec()),
        SystemHandle::HeisenbergFlow(n) | SystemHandle::HeisenbergMap(n) if p.dim() == 2 => {
            Some(n.base_freqs().to_vec())
        }
        _ => None,
    }
}

/// `Σ c_λ e(λ t)`: a trigonometric polynomial in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeTrig {
    pub terms: Vec<(f64, Complex64)>,
}

impl TimeTrig {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|(l, c)| c * e(l * t)).sum()
    }
}

/// Closed form of `t ↦ I_f(k,t)` under a rotation by `omega`.
///
/// Expanding `f(x)·Π f(x + α_j t ω)` keeps exactly the frequency tuples
/// `(k_0, …, k_k)` with `Σ k_j = 0`; each contributes `Π c_{k_j}` at time
/// frequency `Σ α_j k_j·ω`.
pub fn nilfunction_prediction(f: &TrigPolynomial, omega: &[f64], alphas: &[f64]) -> Result<TimeTrig> {
    if omega.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: omega.len(),
        });
    }
    let dot = |k: &[i64]| -> f64 { k.iter().zip(omega).map(|(&k, w)| k as f64 * w).sum() };
    let mut state: HashMap<(Vec<i64>, u64), Complex64> = HashMap::new();
    for (k, c) in f.terms() {
        *state.entry((k.clone(), 0f64.to_bits())).or_default() += c;
    }
    for a in alphas {
        let mut next: HashMap<(Vec<i64>, u64), Complex64> = HashMap::with_capacity(state.len() * f.terms().len());
        for ((sum, lam), c) in &state {
            for (k, ck) in f.terms() {
                let s: Vec<i64> = sum.iter().zip(k).map(|(x, y)| x + y).collect();
                let l = f64::from_bits(*lam) + a * dot(k);
                *next.entry((s, l.to_bits())).or_default() += c * ck;
            }
        }
        state = next;
    }
    let mut terms: Vec<(f64, Complex64)> = state
        .into_iter()
        .filter(|((k, _), _)| k.iter().all(|&v| v == 0))
        .map(|((_, l), c)| (f64::from_bits(l), c))
        .collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, Complex64)> = Vec::with_capacity(terms.len());
    for (l, c) in terms {
        match merged.last_mut() {
            Some((m, acc)) if (l - *m).abs() <= 1e-12 * l.abs().max(1.0) => *acc += c,
            _ => merged.push((l, c)),
        }
    }
    merged.retain(|(_, c)| c.norm() > 0.0);
    Ok(TimeTrig { terms: merged })
}

fn product_along(sys: &SystemHandle, f: &Observable, alphas: &[f64], t: f64, x: &[f64]) -> Complex64 {
    alphas
        .iter()
        .fold(f.eval(x), |acc, a| acc * f.eval(&sys.evolve_unchecked(x, a * t)))
}

/// `I_f(k,t) = ∫ f(x)·f(T^{α_1 t}x)···f(T^{α_k t}x) dμ(x)`.
pub fn multi_average_i(
    sys: &SystemHandle,
    f: &Observable,
    alphas: &[f64],
    t: f64,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_observable(sys, f)?;
    check_multipliers(sys, alphas, t)?;
    if let (Some(omega), Some(p)) = (exact_frequencies(sys, f), f.as_trig()) {
        let series = nilfunction_prediction(p, &omega, alphas)?;
        return Ok(Estimate::exact(series.eval(t)));
    }
    monte_carlo(sys.point_dim(), n_samples, seed, |x| product_along(sys, f, alphas, t, x))
}

/// Rectangle rule on the `n^dim` grid, exact for trig polynomials of
/// degree below `n` on each axis.
fn grid_mean(dim: usize, n: u64, g: impl Fn(&[f64]) -> Complex64 + Sync) -> Complex64 {
    let total = n.pow(dim as u32);
    let vals: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; dim];
            for c in x.iter_mut() {
                *c = (idx % n) as f64 / n as f64;
                idx /= n;
            }
            g(&x)
        })
        .collect();
    vals.iter().sum::<Complex64>() / total as f64
}

/// Sampled `I_f(k,·)` against its closed-form prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NilResidual {
    pub predicted: TimeSeries,
    pub sampled: TimeSeries,
    pub residual: TimeSeries,
    /// Standard error per grid time; zero for exact quadrature.
    pub stderr: Vec<f64>,
    pub method: &'static str,
    pub prediction: TimeTrig,
}

/// Residual `I_f(k,t) − (nilfunction part)(t)` on `t_grid`.
///
/// The sampled side never uses the Fourier bookkeeping: on tori it is a
/// rectangle rule that is exact for the integrand's degree, and on the
/// Heisenberg manifold it is Monte Carlo over the full nilflow.
pub fn nilfunction_residual(
    sys: &SystemHandle,
    f: &Observable,
    alphas: &[f64],
    t_grid: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<NilResidual> {
    let p = f
        .as_trig()
        .ok_or(Error::UnsupportedObservable("raw-callback"))?;
    check_observable(sys, f)?;
    let omega = exact_frequencies(sys, f).ok_or(Error::UnsupportedSystem(
        "nilfunction residual needs a torus system or a Heisenberg system with a base observable",
    ))?;
    if t_grid.is_empty() {
        return Err(Error::EmptyInput("t_grid"));
    }
    for t in t_grid {
        check_multipliers(sys, alphas, *t)?;
    }
    let prediction = nilfunction_prediction(p, &omega, alphas)?;
    let predicted: Vec<Complex64> = t_grid.iter().map(|&t| prediction.eval(t)).collect();

    let torus = matches!(sys, SystemHandle::TorusFlow(_) | SystemHandle::TorusMap(_));
    let (sampled, stderr, method): (Vec<Complex64>, Vec<f64>, _) = if torus {
        let n = (alphas.len() as u64 + 1) * p.max_degree() + 1;
        let dim = p.dim();
        if n.checked_pow(dim as u32).is_none_or(|v| v > MAX_GRID_POINTS) {
            return Err(invalid("observable", "degree too high for exact torus quadrature"));
        }
        let vals = t_grid
            .par_iter()
            .map(|&t| grid_mean(dim, n, |x| product_along(sys, f, alphas, t, x)))
            .collect();
        (vals, vec![0.0; t_grid.len()], "quadrature")
    } else {
        let ests: Vec<Estimate> = t_grid
            .iter()
            .map(|&t| monte_carlo(sys.point_dim(), n_samples, seed, |x| product_along(sys, f, alphas, t, x)))
            .collect::<Result<_>>()?;
        (
            ests.iter().map(|e| e.value).collect(),
            ests.iter().map(|e| e.stderr).collect(),
            "monte-carlo",
        )
    };
    let residual: Vec<Complex64> = sampled.iter().zip(&predicted).map(|(s, p)| s - p).collect();
    Ok(NilResidual {
        predicted: TimeSeries::new(t_grid.to_vec(), predicted)?,
        sampled: TimeSeries::new(t_grid.to_vec(), sampled)?,
        residual: TimeSeries::new(t_grid.to_vec(), residual)?,
        stderr,
        method,
        prediction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::HeisenbergElement;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn circle() -> SystemHandle {
        SystemHandle::torus_flow(vec![1.0]).unwrap()
    }

    fn cos1() -> Observable {
        Observable::Trig(TrigPolynomial::cos(vec![1]))
    }

    #[test]
    fn haar_trivial_cases() {
        let s = circle();
        assert_eq!(integrate_haar(&s, &Observable::one(1), 10, 0).unwrap().value, c(1.0));
        let ex = Observable::Trig(TrigPolynomial::monomial(vec![1], c(1.0)));
        assert_eq!(integrate_haar(&s, &ex, 10, 0).unwrap().value, c(0.0));
    }

    #[test]
    fn haar_monte_carlo_cos_squared() {
        let f = Observable::callback(1, Some(1.0), |x| c((TAU * x[0]).cos().powi(2)));
        let est = integrate_haar(&circle(), &f, 100_000, 9).unwrap();
        assert!(!est.exact);
        assert!(est.agrees(c(0.5), 3.0), "{est:?}");
        assert_eq!(est, integrate_haar(&circle(), &f, 100_000, 9).unwrap());
    }

    #[test]
    fn haar_callback_needs_bound() {
        let f = Observable::callback(1, None, |_| c(1.0));
        assert_eq!(integrate_haar(&circle(), &f, 10, 0), Err(Error::MissingBound));
    }

    #[test]
    fn single_multiplier_closed_form() {
        for t in [0.0, 0.3, 0.77] {
            let v = multi_average_i(&circle(), &cos1(), &[1.0], t, 0, 0).unwrap();
            assert!((v.value - c(0.5 * (TAU * t).cos())).norm() < 1e-6);
        }
    }

    #[test]
    fn two_multipliers_vanish() {
        // cos(2πx)cos(2π(x+t))cos(2π(x+2t)): every frequency sum ±1±1±1 is odd.
        for t in [0.0, 0.1, 0.25, 0.9] {
            let v = multi_average_i(&circle(), &cos1(), &[1.0, 2.0], t, 0, 0).unwrap();
            assert!(v.value.norm() < 1e-15);
        }
    }

    #[test]
    fn constant_observable_gives_one() {
        let v = multi_average_i(&circle(), &Observable::one(1), &[1.0, 3.0], 0.4, 0, 0).unwrap();
        assert_eq!(v.value, c(1.0));
    }

    #[test]
    fn repeated_alphas_rejected() {
        let r = multi_average_i(&circle(), &cos1(), &[2.0, 2.0], 0.4, 0, 0);
        assert_eq!(r, Err(Error::RepeatedAlphas));
    }

    #[test]
    fn map_needs_integral_times() {
        let m = SystemHandle::torus_map(vec![0.3]).unwrap();
        assert!(matches!(
            multi_average_i(&m, &cos1(), &[1.0], 0.5, 0, 0),
            Err(Error::NonIntegralTime(_))
        ));
        assert!(multi_average_i(&m, &cos1(), &[1.0], 2.0, 0, 0).is_ok());
    }

    #[test]
    fn residual_cos_single() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.37).collect();
        let r = nilfunction_residual(&circle(), &cos1(), &[1.0], &grid, 0, 0).unwrap();
        assert_eq!(r.method, "quadrature");
        for (t, p) in grid.iter().zip(r.predicted.values()) {
            assert!((p - c(0.5 * (TAU * t).cos())).norm() < 1e-12);
        }
        assert!(r.residual.values().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn residual_rejects_callbacks() {
        let f = Observable::callback(1, Some(1.0), |_| c(1.0));
        assert_eq!(
            nilfunction_residual(&circle(), &f, &[1.0], &[0.0], 0, 0).unwrap_err(),
            Error::UnsupportedObservable("raw-callback")
        );
    }

    #[test]
    fn heisenberg_pullback_agrees_with_factor() {
        let h = SystemHandle::nilflow(HeisenbergElement::new(2f64.sqrt(), 3f64.sqrt(), 0.0)).unwrap();
        let f = Observable::Trig(TrigPolynomial::cos(vec![1, 0]));
        let r = nilfunction_residual(&h, &f, &[1.0], &[0.0, 0.4, 1.3], 20_000, 5).unwrap();
        assert_eq!(r.method, "monte-carlo");
        for (res, se) in r.residual.values().iter().zip(&r.stderr) {
            assert!(res.norm() <= 3.0 * se + 1e-12, "{res} vs {se}");
        }
    }

    fn small_trig(dim: usize) -> impl Strategy<Value = TrigPolynomial> {
        prop::collection::vec(
            (prop::collection::vec(-2i64..=2, dim), -1.0f64..1.0, -1.0f64..1.0),
            1..4,
        )
        .prop_map(move |ts| {
            TrigPolynomial::new(dim, ts.into_iter().map(|(k, a, b)| (k, Complex64::new(a, b))).collect())
                .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn exact_and_monte_carlo_agree(p in small_trig(2), seed in 0u64..1000) {
            let sys = SystemHandle::torus_flow(vec![1.0, 2f64.sqrt()]).unwrap();
            let exact = Observable::Trig(p.clone());
            let raw = Observable::callback(2, Some(p.sup_bound()), move |x| p.eval(x));
            let a = integrate_haar(&sys, &exact, 0, 0).unwrap();
            let b = integrate_haar(&sys, &raw, 20_000, seed).unwrap();
            prop_assert!(b.agrees(a.value, 3.5), "{a:?} {b:?}");
        }

        #[test]
        fn prediction_matches_quadrature(p in small_trig(1), t in 0.0f64..50.0) {
            let sys = SystemHandle::torus_flow(vec![0.7]).unwrap();
            let f = Observable::Trig(p);
            let r = nilfunction_residual(&sys, &f, &[1.0, -2.0], &[t], 0, 0).unwrap();
            prop_assert!(r.residual.values()[0].norm() < 1e-10);
        }

        #[test]
        fn average_invariant_under_evolution(s in 0.0f64..100.0, seed in 0u64..100) {
            // integrating over T^s-shifted samples estimates the same I_f
            let sys = circle();
            let f = cos1();
            let g = |x: &[f64]| product_along(&sys, &f, &[1.0], 0.3, x);
            let base = monte_carlo(1, 20_000, seed, g).unwrap();
            let moved = monte_carlo(1, 20_000, seed, |x| g(&sys.evolve_unchecked(x, s))).unwrap();
            prop_assert!((base.value - moved.value).norm() <= 3.0 * (base.stderr + moved.stderr));
        }
    }
}
