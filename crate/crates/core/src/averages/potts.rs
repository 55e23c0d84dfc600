use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::{e, Observable};
use crate::algebra::{polys_r_independent, Polynomial};
use crate::error::{invalid, Error, Result};
use crate::systems::SystemHandle;

/// Below this `|q'|` the integrand is resolved by quadrature panels.
const SLOW_PHASE: f64 = 50.0;
/// Phase advance per panel, in turns.
const PANEL_TURNS: f64 = 0.25;
const MAX_PANEL: f64 = 16.0;
const ASYMPTOTIC_TERMS: usize = 8;

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

// Dense real polynomials, ascending coefficients.

fn trim(mut p: Vec<f64>) -> Vec<f64> {
    while p.last() == Some(&0.0) {
        p.pop();
    }
    p
}

fn peval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn deriv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn psub_scaled(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - s * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign changes of `p` strictly inside `(a, b)`, ascending.
fn roots_in(p: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = trim(p.to_vec());
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            if a < r && r < b {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut pts = vec![a];
            pts.extend(roots_in(&deriv(&p), a, b));
            pts.push(b);
            let mut out = Vec::new();
            for w in pts.windows(2) {
                let (l, r) = (w[0], w[1]);
                let (fl, fr) = (peval(&p, l), peval(&p, r));
                if fl * fr < 0.0 {
                    out.push(bisect(l, r, |t| peval(&p, t)));
                } else if fr == 0.0 && r < b {
                    out.push(r);
                }
            }
            out.dedup();
            out
        }
    }
}

/// `∫_u^v e(q)` by Gauss–Legendre panels sized so the phase advances at
/// most a quarter turn per panel; `|q'|` is monotone on `[u, v]`.
fn panels(q: &[f64], dq: &[f64], u: f64, v: f64) -> Complex64 {
    let mut acc = Complex64::default();
    let mut s = u;
    while s < v {
        let mut w = (v - s).min(MAX_PANEL).min(PANEL_TURNS / peval(dq, s).abs().max(1e-300));
        while peval(dq, s + w).abs() * w > PANEL_TURNS && w > 1e-12 {
            w *= 0.5;
        }
        let (mid, half) = (s + 0.5 * w, 0.5 * w);
        let mut panel = Complex64::default();
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            panel += wt * (e(peval(q, mid + half * x)) + e(peval(q, mid - half * x)));
        }
        acc += panel * half;
        s += w;
    }
    acc
}

/// `∫_u^v e(q)` by integration by parts, for `|q'| ≥ SLOW_PHASE` on `[u, v]`.
///
/// With `N_0 = 1`, `N_{n+1} = N_n'q' − (2n+1)N_n q''`, the primitive is
/// `e(q)·Σ (−1)^n N_n / (q'^{2n+1} (2πi)^{n+1})`.
fn asymptotic(q: &[f64], dq: &[f64], u: f64, v: f64) -> Complex64 {
    let d2q = deriv(dq);
    let mut numerators = vec![vec![1.0]];
    for n in 0..ASYMPTOTIC_TERMS - 1 {
        let cur = numerators.last().unwrap();
        let next = trim(psub_scaled(&pmul(&deriv(cur), dq), &pmul(cur, &d2q), (2 * n + 1) as f64));
        if next.is_empty() {
            break;
        }
        numerators.push(next);
    }
    let two_pi_i = Complex64::new(0.0, TAU);
    let primitive = |t: f64| -> Complex64 {
        let d = peval(dq, t);
        let mut sum = Complex64::default();
        let mut denom = two_pi_i * d;
        for (n, num) in numerators.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * peval(num, t) / denom;
            denom *= two_pi_i * d * d;
        }
        sum * e(peval(q, t))
    };
    primitive(v) - primitive(u)
}

/// `∫_a^b exp(2πi q(t)) dt` for a real polynomial `q` (ascending coefficients).
///
/// The interval is cut at the zeros of `q'` and `q''`, so `|q'|` is monotone
/// on every piece; fast pieces are integrated by parts, slow ones by panels.
pub fn oscillatory_integral(q: &[f64], a: f64, b: f64) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(invalid("interval", "need finite a ≤ b"));
    }
    if q.iter().any(|c| !c.is_finite()) {
        return Err(invalid("phase", "non-finite coefficient"));
    }
    let q = trim(q.to_vec());
    if q.len() <= 1 {
        return Ok(e(q.first().copied().unwrap_or(0.0)) * (b - a));
    }
    if q.len() == 2 {
        // linear phase: closed form
        let (c0, c1) = (q[0], q[1]);
        if c1 * (b - a) == 0.0 {
            return Ok(e(c0) * (b - a));
        }
        return Ok((e(c0 + c1 * b) - e(c0 + c1 * a)) / Complex64::new(0.0, TAU * c1));
    }
    let dq = deriv(&q);
    let d2q = deriv(&dq);
    let mut cuts = roots_in(&dq, a, b);
    cuts.extend(roots_in(&d2q, a, b));
    cuts.sort_by(f64::total_cmp);
    let mut pts = vec![a];
    pts.extend(cuts);
    pts.push(b);
    let mut total = Complex64::default();
    for w in pts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let (su, sv) = (peval(&dq, u).abs(), peval(&dq, v).abs());
        let fast = |t: f64| peval(&dq, t).abs() - SLOW_PHASE;
        if su >= SLOW_PHASE && sv >= SLOW_PHASE {
            total += asymptotic(&q, &dq, u, v);
        } else if su < SLOW_PHASE && sv < SLOW_PHASE {
            total += panels(&q, &dq, u, v);
        } else {
            let m = bisect(u, v, fast);
            let (slow, quick) = if su < sv { ((u, m), (m, v)) } else { ((m, v), (u, m)) };
            total += panels(&q, &dq, slow.0, slow.1);
            total += asymptotic(&q, &dq, quick.0, quick.1);
        }
    }
    Ok(total)
}

/// How the time average `(1/R)∫_0^R` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeQuadrature {
    /// Exact Fourier expansion with [`oscillatory_integral`] per phase.
    Oscillatory,
    /// Midpoint rule at the given step on the evolved observables.
    Step { h: f64 },
}

/// Step used by [`TimeQuadrature::Step`] when none is configured.
pub fn default_step(r: f64) -> f64 {
    (1e-3 * r.sqrt()).min(0.01)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PottsOptions {
    pub quadrature: TimeQuadrature,
    pub x_samples: usize,
    pub seed: u64,
}

impl Default for PottsOptions {
    fn default() -> Self {
        Self {
            quadrature: TimeQuadrature::Oscillatory,
            x_samples: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PottsReport {
    /// Root mean square of the deviation over the sampled `x`.
    pub deviation: f64,
    pub max_deviation: f64,
    pub product_of_integrals: Complex64,
    pub r: f64,
    pub x_samples: usize,
    pub quadrature: TimeQuadrature,
}

/// `(1/R)∫_0^R Π f_j(T^{p_j(t)}x) dt − Π ∫f_j dμ` on a torus flow, in RMS
/// over seeded uniform `x`.
pub fn potts_average(
    sys: &SystemHandle,
    polys: &[Polynomial],
    fs: &[Observable],
    r: f64,
    opts: &PottsOptions,
) -> Result<PottsReport> {
    let SystemHandle::TorusFlow(flow) = sys else {
        return Err(Error::UnsupportedSystem("potts averages need a torus flow"));
    };
    if polys.len() != fs.len() {
        return Err(Error::ArityMismatch {
            expected: polys.len(),
            got: fs.len(),
        });
    }
    if !polys_r_independent(polys)? {
        return Err(Error::IndependenceViolation);
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("R", "must be positive"));
    }
    if opts.x_samples == 0 {
        return Err(invalid("x_samples", "must be positive"));
    }
    let dim = flow.dim();
    let trigs = fs
        .iter()
        .map(|f| match f.as_trig() {
            Some(p) if p.dim() == dim => Ok(p),
            Some(p) => Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            }),
            None => Err(Error::UnsupportedObservable("raw-callback")),
        })
        .collect::<Result<Vec<_>>>()?;
    let omega = flow.freqs();
    let product: Complex64 = trigs.iter().map(|p| p.integral()).product();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let xs: Vec<Vec<f64>> = (0..opts.x_samples)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();

    let averages: Vec<Complex64> = match opts.quadrature {
        TimeQuadrature::Oscillatory => {
            // each term tuple contributes C·e(K·x)·(1/R)∫e(q)
            let mut modes: Vec<(Vec<i64>, Complex64, Vec<f64>)> = vec![(vec![0; dim], Complex64::new(1.0, 0.0), Vec::new())];
            for (p, poly) in trigs.iter().zip(polys) {
                let pc = poly.float_coeffs();
                let mut next = Vec::with_capacity(modes.len() * p.terms().len());
                for (k_sum, c, q) in &modes {
                    for (k, ck) in p.terms() {
                        let w: f64 = k.iter().zip(omega).map(|(&k, w)| k as f64 * w).sum();
                        let n = q.len().max(pc.len());
                        let q2 = (0..n)
                            .map(|i| q.get(i).copied().unwrap_or(0.0) + w * pc.get(i).copied().unwrap_or(0.0))
                            .collect();
                        let ks = k_sum.iter().zip(k).map(|(a, b)| a + b).collect();
                        next.push((ks, c * ck, q2));
                    }
                }
                modes = next;
            }
            let weighted: Vec<(Vec<i64>, Complex64)> = modes
                .par_iter()
                .map(|(k, c, q)| Ok((k.clone(), c * oscillatory_integral(q, 0.0, r)? / r)))
                .collect::<Result<_>>()?;
            xs.iter()
                .map(|x| {
                    weighted
                        .iter()
                        .map(|(k, c)| c * e(k.iter().zip(x).map(|(&k, x)| k as f64 * x).sum()))
                        .sum()
                })
                .collect()
        }
        TimeQuadrature::Step { h } => {
            if !(h > 0.0) {
                return Err(invalid("h", "step must be positive"));
            }
            let n = (r / h).ceil() as u64;
            let h = r / n as f64;
            xs.par_iter()
                .map(|x| {
                    let sum: Complex64 = (0..n)
                        .map(|i| {
                            let t = (i as f64 + 0.5) * h;
                            fs.iter()
                                .zip(polys)
                                .map(|(f, p)| f.eval(&sys.evolve_unchecked(x, p.eval(t))))
                                .product::<Complex64>()
                        })
                        .sum();
                    sum / n as f64
                })
                .collect()
        }
    };
    let devs: Vec<f64> = averages.iter().map(|a| (a - product).norm()).collect();
    let deviation = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
    Ok(PottsReport {
        deviation,
        max_deviation: devs.iter().copied().fold(0.0, f64::max),
        product_of_integrals: product,
        r,
        x_samples: opts.x_samples,
        quadrature: opts.quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::super::observable::TrigPolynomial;
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson with a fixed, very fine step: slow but independent.
    fn simpson(q: &[f64], a: f64, b: f64, n: usize) -> Complex64 {
        let h = (b - a) / n as f64;
        let mut s = e(peval(q, a)) + e(peval(q, b));
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * e(peval(q, a + i as f64 * h));
        }
        s * h / 3.0
    }

    #[test]
    fn linear_phase_closed_form() {
        let v = oscillatory_integral(&[0.0, 1.0], 0.0, 1.0).unwrap();
        assert!(v.norm() < 1e-15);
        let v = oscillatory_integral(&[0.25], 0.0, 2.0).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn fresnel_limit() {
        // ∫_0^∞ e(t²) dt = (1 + i)/4
        let v = oscillatory_integral(&[0.0, 0.0, 1.0], 0.0, 1e4).unwrap();
        assert!((v - Complex64::new(0.25, 0.25)).norm() < 1e-4, "{v}");
    }

    #[test]
    fn matches_simpson_on_cubic() {
        let q = [0.1, -3.0, 0.5, 0.2];
        let a = oscillatory_integral(&q, -5.0, 12.0).unwrap();
        let b = simpson(&q, -5.0, 12.0, 2_000_000);
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn roots_of_cubic() {
        // (t−1)(t−2)(t−3)
        let r = roots_in(&[-6.0, 11.0, -6.0, 1.0], 0.0, 10.0);
        assert_eq!(r.len(), 3);
        for (x, y) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn ex() -> Observable {
        Observable::Trig(TrigPolynomial::monomial(vec![1], Complex64::new(1.0, 0.0)))
    }

    fn flow() -> SystemHandle {
        SystemHandle::torus_flow(vec![1.0]).unwrap()
    }

    fn t_and_t2() -> Vec<Polynomial> {
        vec![Polynomial::from_i64(&[0, 1]), Polynomial::from_i64(&[0, 0, 1])]
    }

    #[test]
    fn constants_have_no_deviation() {
        let one = Observable::one(1);
        let r = potts_average(&flow(), &t_and_t2(), &[one.clone(), one], 100.0, &PottsOptions::default()).unwrap();
        assert!(r.deviation < 1e-14);
    }

    #[test]
    fn dependent_polys_rejected() {
        let p = vec![Polynomial::from_i64(&[0, 1]), Polynomial::from_i64(&[0, 2])];
        let r = potts_average(&flow(), &p, &[ex(), ex()], 10.0, &PottsOptions::default());
        assert_eq!(r.unwrap_err(), Error::IndependenceViolation);
    }

    #[test]
    fn deviation_decays() {
        let o = PottsOptions::default();
        let a = potts_average(&flow(), &t_and_t2(), &[ex(), ex()], 1e4, &o).unwrap();
        let b = potts_average(&flow(), &t_and_t2(), &[ex(), ex()], 1e5, &o).unwrap();
        assert!(a.deviation <= 0.05);
        assert!(b.deviation <= 1.2 * a.deviation);
    }

    #[test]
    fn step_mode_agrees_at_short_horizon() {
        let fast = potts_average(&flow(), &t_and_t2(), &[ex(), ex()], 20.0, &PottsOptions::default()).unwrap();
        let slow = potts_average(
            &flow(),
            &t_and_t2(),
            &[ex(), ex()],
            20.0,
            &PottsOptions {
                quadrature: TimeQuadrature::Step { h: 1e-4 },
                ..PottsOptions::default()
            },
        )
        .unwrap();
        assert!((fast.deviation - slow.deviation).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quadratic_against_simpson(c1 in -5.0f64..5.0, c2 in -2.0f64..2.0, b in 0.5f64..20.0) {
            let q = [0.3, c1, c2];
            let a = oscillatory_integral(&q, 0.0, b).unwrap();
            let s = simpson(&q, 0.0, b, 400_000);
            prop_assert!((a - s).norm() < 1e-7, "{} vs {}", a, s);
        }
    }
}
