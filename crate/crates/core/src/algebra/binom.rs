use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::symbolic::{Basis, SymbolicReal};
use crate::error::Result;

/// Generalized binomial coefficient `a(a-1)…(a-n+1)/n!`, exact.
pub fn binom_rational(a: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..n {
        let k = BigRational::from_integer(i.into());
        acc = acc * (a - &k) / BigRational::from_integer((i + 1).into());
    }
    acc
}

/// Float version of [`binom_rational`].
pub fn binom_f64(a: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..n {
        acc *= (a - i as f64) / (i + 1) as f64;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub enum BinomValue {
    Exact(BigRational),
    Float(f64),
}

impl BinomValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            BinomValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            BinomValue::Float(v) => *v,
        }
    }
}

/// Exact for rational `a`, float evaluation through the basis otherwise.
pub fn binom_real(a: &SymbolicReal, n: u32, basis: &Basis) -> Result<BinomValue> {
    if n == 0 {
        return Ok(BinomValue::Exact(BigRational::one()));
    }
    match a.as_rational() {
        Some(q) => Ok(BinomValue::Exact(binom_rational(&q, n))),
        None => Ok(BinomValue::Float(binom_f64(a.to_f64(basis)?, n))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn half_choose_two() {
        assert_eq!(binom_rational(&r(1, 2), 2), r(-1, 8));
    }

    #[test]
    fn integer_binomial_and_empty_product() {
        assert_eq!(binom_rational(&r(3, 1), 2), r(3, 1));
        assert_eq!(binom_rational(&r(-7, 3), 0), r(1, 1));
        let b = Basis::radicals(&[2]);
        let a: SymbolicReal = "√2".parse().unwrap();
        assert_eq!(binom_real(&a, 0, &b).unwrap(), BinomValue::Exact(r(1, 1)));
        let v = binom_real(&a, 2, &b).unwrap().to_f64();
        let s = 2f64.sqrt();
        assert!((v - s * (s - 1.0) / 2.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn pascal_recurrence(num in -1000i64..1000, den in 1i64..97, n in 1u32..=8) {
            let a = r(num, den);
            let one = BigRational::one();
            let lhs = binom_rational(&a, n);
            let rhs = binom_rational(&(&a - &one), n - 1) + binom_rational(&(&a - &one), n);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn float_matches_exact(num in -50i64..50, den in 1i64..9, n in 0u32..=6) {
            let a = r(num, den);
            let exact = binom_rational(&a, n).to_f64().unwrap();
            let approx = binom_f64(num as f64 / den as f64, n);
            prop_assert!((exact - approx).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }
}
