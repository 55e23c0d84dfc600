use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::systems::SystemHandle;

/// `e(θ) = exp(2πiθ)`
#[inline]
pub fn e(theta: f64) -> Complex64 {
    let r = theta - theta.round();
    Complex64::from_polar(1.0, TAU * r)
}

/// Finite sum `Σ c_k e(k·x)` over integer frequency vectors `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    terms: Vec<(Vec<i64>, Complex64)>,
}

impl TrigPolynomial {
    /// Merges repeated frequencies and drops zero coefficients.
    pub fn new(dim: usize, terms: Vec<(Vec<i64>, Complex64)>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        let mut merged: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, c) in terms {
            if k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(invalid("coefficient", "non-finite"));
            }
            *merged.entry(k).or_default() += c;
        }
        Ok(Self {
            dim,
            terms: merged.into_iter().filter(|(_, c)| *c != Complex64::default()).collect(),
        })
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::new(dim, vec![(vec![0; dim], c)]).expect("valid constant")
    }

    pub fn monomial(freq: Vec<i64>, c: Complex64) -> Self {
        let dim = freq.len();
        Self::new(dim, vec![(freq, c)]).expect("valid monomial")
    }

    /// `cos(2π k·x)`
    pub fn cos(freq: Vec<i64>) -> Self {
        let neg = freq.iter().map(|k| -k).collect();
        let dim = freq.len();
        Self::new(
            dim,
            vec![(freq, Complex64::new(0.5, 0.0)), (neg, Complex64::new(0.5, 0.0))],
        )
        .expect("valid cosine")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<i64>, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(x).map(|(&k, &x)| k as f64 * x).sum();
                c * e(phase)
            })
            .sum()
    }

    /// Lebesgue integral over `[0,1)^dim`: the zero-frequency coefficient.
    pub fn integral(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(k, _)| k.iter().all(|&v| v == 0))
            .map_or(Complex64::default(), |(_, c)| *c)
    }

    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    /// Largest `|k_i|` over all terms and axes.
    pub fn max_degree(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|(k, _)| k.iter().map(|v| v.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                terms.push((a.iter().zip(b).map(|(x, y)| x + y).collect(), ca * cb));
            }
        }
        Self::new(self.dim, terms)
    }
}

pub type Callback = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Bounded function on the phase space.
#[derive(Clone)]
pub enum Observable {
    Trig(TrigPolynomial),
    Callback {
        f: Callback,
        dim: usize,
        sup_bound: Option<f64>,
    },
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Trig(p) => f.debug_tuple("Trig").field(p).finish(),
            Observable::Callback { dim, sup_bound, .. } => f
                .debug_struct("Callback")
                .field("dim", dim)
                .field("sup_bound", sup_bound)
                .finish_non_exhaustive(),
        }
    }
}

impl Observable {
    pub fn one(dim: usize) -> Self {
        Observable::Trig(TrigPolynomial::constant(dim, Complex64::new(1.0, 0.0)))
    }

    pub fn callback(
        dim: usize,
        sup_bound: Option<f64>,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Observable::Callback {
            f: Arc::new(f),
            dim,
            sup_bound,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Observable::Trig(p) if p.terms().len() == 1 => "trig-monomial",
            Observable::Trig(_) => "trig-polynomial",
            Observable::Callback { .. } => "raw-callback",
        }
    }

    /// Number of leading point coordinates the observable reads.
    pub fn dim(&self) -> usize {
        match self {
            Observable::Trig(p) => p.dim(),
            Observable::Callback { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            Observable::Trig(p) => p.eval(&x[..p.dim()]),
            Observable::Callback { f, dim, .. } => f(&x[..*dim]),
        }
    }

    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            Observable::Trig(p) => Some(p.sup_bound()),
            Observable::Callback { sup_bound, .. } => *sup_bound,
        }
    }

    pub fn as_trig(&self) -> Option<&TrigPolynomial> {
        match self {
            Observable::Trig(p) => Some(p),
            Observable::Callback { .. } => None,
        }
    }
}

/// Whether `f` is a function on `sys`'s space.
///
/// Heisenberg spaces also accept 2-dimensional observables, read as
/// pullbacks from the `T²` factor.
pub fn check_observable(sys: &SystemHandle, f: &Observable) -> Result<()> {
    let n = sys.point_dim();
    let d = f.dim();
    let ok = d == n
        || (d == 2
            && matches!(
                sys,
                SystemHandle::HeisenbergFlow(_) | SystemHandle::HeisenbergMap(_)
            ));
    if !ok {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d,
        });
    }
    match f.sup_bound() {
        Some(b) if b.is_finite() => Ok(()),
        Some(_) => Err(invalid("sup_bound", "must be finite")),
        None => Err(Error::MissingBound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn merge_and_integral() {
        let p = TrigPolynomial::new(1, vec![(vec![1], c(1.0)), (vec![1], c(-1.0)), (vec![0], c(2.0))])
            .unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.integral(), c(2.0));
        assert_eq!(TrigPolynomial::monomial(vec![1], c(1.0)).integral(), c(0.0));
    }

    #[test]
    fn cos_squared_has_mean_half() {
        let f = TrigPolynomial::cos(vec![1]);
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.integral(), c(0.5));
        let x = 0.1;
        assert!((sq.eval(&[x]).re - (TAU * x).cos().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn phase_reduction() {
        assert!((e(1e9 + 0.25) - Complex64::new(0.0, 1.0)).norm() < 1e-6);
        assert!((e(0.5) + c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn kinds_and_bounds() {
        let o = Observable::callback(1, None, |_| c(1.0));
        assert_eq!(o.kind(), "raw-callback");
        let sys = SystemHandle::torus_flow(vec![1.0]).unwrap();
        assert_eq!(check_observable(&sys, &o), Err(Error::MissingBound));
        assert_eq!(Observable::one(1).kind(), "trig-monomial");
        let h = SystemHandle::nilflow(crate::systems::HeisenbergElement::new(0.1, 0.2, 0.0)).unwrap();
        assert!(check_observable(&h, &Observable::one(2)).is_ok());
        assert!(check_observable(&sys, &Observable::one(2)).is_err());
    }
}
