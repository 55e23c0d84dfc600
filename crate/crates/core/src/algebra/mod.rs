//! Exact rational arithmetic over a declared symbolic basis.

mod binom;
mod matrix;
mod polynomial;
mod symbolic;

pub use binom::{binom_f64, binom_rational, binom_real, BinomValue};
pub use matrix::{primitive, rational_kernel, RationalMatrix};
pub use polynomial::{polys_r_independent, Polynomial};
pub use symbolic::{
    parse_rational, radicand, rationally_independent, rationally_independent_in, relation_holds,
    sqrt_decimal, Basis, Independence, SymbolicReal, ONE,
};

pub use num_rational::BigRational;
