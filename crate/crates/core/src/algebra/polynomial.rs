use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::matrix::{rational_kernel, RationalMatrix};
use super::symbolic::parse_rational;
use crate::error::{Error, Result};

/// Real polynomial in `t` with exact rational coefficients (index = degree).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
    float: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let float = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        Self { coeffs, float }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn parse(coeffs: &[impl AsRef<str>]) -> Result<Self> {
        Ok(Self::new(
            coeffs
                .iter()
                .map(|c| parse_rational(c.as_ref()))
                .collect::<Result<_>>()?,
        ))
    }

    /// `t`
    pub fn identity() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn float_coeffs(&self) -> &[f64] {
        &self.float
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.float.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// True iff no nontrivial rational combination of `polys` is constant.
///
/// For rational coefficients this coincides with independence over the reals.
pub fn polys_r_independent(polys: &[Polynomial]) -> Result<bool> {
    if polys.is_empty() {
        return Err(Error::EmptyInput("polynomials"));
    }
    let max_deg = polys.iter().filter_map(Polynomial::degree).max().unwrap_or(0);
    if max_deg == 0 {
        return Ok(false);
    }
    let rows: Vec<Vec<BigRational>> = (1..=max_deg)
        .map(|d| {
            polys
                .iter()
                .map(|p| p.coeffs.get(d).cloned().unwrap_or_else(BigRational::zero))
                .collect()
        })
        .collect();
    let m = RationalMatrix::from_rows(rows)?;
    Ok(rational_kernel(&m).is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_degree() {
        let p = Polynomial::from_i64(&[1, 0, 2, 0, 0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(3.0), 19.0);
        assert!(Polynomial::from_i64(&[5]).is_constant());
        let q = Polynomial::parse(&["0", "1/2"]).unwrap();
        assert_eq!(q.eval(3.0), 1.5);
    }

    #[test]
    fn independence_of_families() {
        let t = Polynomial::identity();
        let t2 = Polynomial::from_i64(&[0, 0, 1]);
        let two_t = Polynomial::from_i64(&[3, 2]);
        assert!(polys_r_independent(&[t.clone(), t2]).unwrap());
        assert!(!polys_r_independent(&[t.clone(), two_t]).unwrap());
        assert!(!polys_r_independent(&[Polynomial::from_i64(&[1])]).unwrap());
        assert!(polys_r_independent(&[]).is_err());
    }
}
