//! Exact elements of a finite-dimensional rational vector space spanned by
//! declared irrational symbols.
//!
//! Symbols are opaque labels. The library assumes, and never tries to prove,
//! that the declared symbols together with the unit are linearly independent
//! over the rationals. Labels of the form `√n`, `sqrtn` or `sqrt(n)` are
//! recognized as square roots, which gives them an automatic product table
//! (`√a·√b = k√m` with `m` squarefree); any other product must be declared.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{primitive, rational_kernel, RationalMatrix};
use crate::error::{Error, Result};

/// Label of the rational unit.
pub const ONE: &str = "1";

/// Significant digits used for generated radical decimals.
const DEFAULT_DIGITS: u32 = 50;

/// Parses `3`, `-2`, `7/4`, `0.125` or `1.5e-3` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Parse(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all = format!("{int_part}{frac_part}");
    let n: BigInt = all.parse().map_err(|_| err())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(n);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Square-root radicand encoded in a symbol label, if any.
pub fn radicand(label: &str) -> Option<u64> {
    let digits = if let Some(r) = label.strip_prefix('√') {
        r
    } else if let Some(r) = label.strip_prefix("sqrt(") {
        r.strip_suffix(')')?
    } else {
        label.strip_prefix("sqrt")?
    };
    let n: u64 = digits.parse().ok()?;
    (n >= 2).then_some(n)
}

/// Splits `n` into `(k, m)` with `n = k²·m` and `m` squarefree.
fn squarefree_split(mut n: u64) -> (u64, u64) {
    let mut k = 1;
    let mut m = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= p;
        }
        if e % 2 == 1 {
            m *= p;
        }
        p += 1;
    }
    (k, m * n)
}

/// Decimal expansion of `√n` with `digits` significant digits (truncated).
pub fn sqrt_decimal(n: u64, digits: u32) -> String {
    let int_digits = (n as f64).sqrt().floor().to_string().len() as u32;
    let frac = digits.saturating_sub(int_digits);
    let scaled = BigInt::from(n) * num_traits::pow(BigInt::from(10), 2 * frac as usize);
    let root = scaled.sqrt().to_string();
    let split = root.len() - frac as usize;
    format!("{}.{}", &root[..split], &root[split..])
}

#[derive(Debug, Clone, PartialEq)]
struct SymbolInfo {
    decimal: String,
    value: f64,
    radicand: Option<u64>,
}

/// Declared irrational basis with float renderings and a product table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Basis {
    symbols: BTreeMap<String, SymbolInfo>,
    products: BTreeMap<(String, String), SymbolicReal>,
}

impl Basis {
    pub fn new() -> Self {
        Self::default()
    }

    /// Basis `{√n : n ∈ radicands}` with generated 50-digit decimals.
    pub fn radicals(radicands: &[u64]) -> Self {
        let mut b = Self::new();
        for &n in radicands {
            b.declare(&format!("√{n}"), &sqrt_decimal(n, DEFAULT_DIGITS))
                .expect("generated radical decimal parses");
        }
        b
    }

    /// Declares `symbol` with the given decimal rendering.
    pub fn declare(&mut self, symbol: &str, decimal: &str) -> Result<()> {
        if symbol == ONE || symbol.is_empty() {
            return Err(Error::Parse(symbol.to_string()));
        }
        if !symbol.chars().all(is_symbol_char) || symbol.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(Error::Parse(symbol.to_string()));
        }
        let value: f64 = decimal
            .trim()
            .parse()
            .map_err(|_| Error::Parse(decimal.to_string()))?;
        if !value.is_finite() {
            return Err(Error::Parse(decimal.to_string()));
        }
        self.symbols.insert(
            symbol.to_string(),
            SymbolInfo {
                decimal: decimal.trim().to_string(),
                value,
                radicand: radicand(symbol),
            },
        );
        Ok(())
    }

    /// Declares `a·b = value` for non-radical symbols.
    pub fn declare_product(&mut self, a: &str, b: &str, value: SymbolicReal) -> Result<()> {
        for s in [a, b] {
            if !self.contains(s) || s == ONE {
                return Err(Error::UnknownSymbol(s.to_string()));
            }
        }
        self.check_members(std::slice::from_ref(&value))?;
        let key = ordered(a, b);
        self.products.insert(key, value);
        Ok(())
    }

    pub fn contains(&self, symbol: &str) -> bool {
        symbol == ONE || self.symbols.contains_key(symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, &str)> {
        self.symbols
            .iter()
            .map(|(k, v)| (k.as_str(), v.decimal.as_str()))
    }

    pub fn value(&self, symbol: &str) -> Option<f64> {
        if symbol == ONE {
            Some(1.0)
        } else {
            self.symbols.get(symbol).map(|s| s.value)
        }
    }

    /// Fails with `UnknownSymbol` when a value uses a label outside the basis.
    pub fn check_members(&self, vals: &[SymbolicReal]) -> Result<()> {
        for v in vals {
            if let Some(s) = v.symbols().find(|s| !self.contains(s)) {
                return Err(Error::UnknownSymbol(s.to_string()));
            }
        }
        Ok(())
    }

    fn symbol_for_radicand(&self, m: u64) -> Option<&str> {
        self.symbols
            .iter()
            .find(|(_, info)| info.radicand == Some(m))
            .map(|(k, _)| k.as_str())
    }

    /// Product of two basis symbols expressed over the basis.
    pub fn symbol_product(&self, a: &str, b: &str) -> Result<SymbolicReal> {
        if a == ONE {
            return Ok(SymbolicReal::symbol(b));
        }
        if b == ONE {
            return Ok(SymbolicReal::symbol(a));
        }
        let unsupported = || Error::UnsupportedBasis {
            product: format!("{a}·{b}"),
        };
        if let Some(v) = self.products.get(&ordered(a, b)) {
            return Ok(v.clone());
        }
        let (ra, rb) = match (self.symbols.get(a), self.symbols.get(b)) {
            (Some(x), Some(y)) => (x.radicand, y.radicand),
            (None, _) => return Err(Error::UnknownSymbol(a.to_string())),
            (_, None) => return Err(Error::UnknownSymbol(b.to_string())),
        };
        let (Some(ra), Some(rb)) = (ra, rb) else {
            return Err(unsupported());
        };
        let (k, m) = squarefree_split(ra.checked_mul(rb).ok_or_else(unsupported)?);
        let coeff = BigRational::from_integer(k.into());
        if m == 1 {
            return Ok(SymbolicReal::rational(coeff));
        }
        let sym = self.symbol_for_radicand(m).ok_or_else(unsupported)?;
        Ok(SymbolicReal::symbol(sym).scale(&coeff))
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '√' | '_' | '(' | ')' | '\'')
}

/// Exact rational combination of basis symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SymbolicReal {
    coeffs: BTreeMap<String, BigRational>,
}

impl SymbolicReal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(ONE, q);
        s
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn symbol(label: &str) -> Self {
        let mut s = Self::zero();
        s.add_term(label, BigRational::one());
        s
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = (&'a str, BigRational)>) -> Self {
        let mut s = Self::zero();
        for (k, v) in terms {
            s.add_term(k, v);
        }
        s
    }

    fn add_term(&mut self, label: &str, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let entry = self
            .coeffs
            .entry(label.to_string())
            .or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.coeffs.remove(label);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The rational value, if no irrational symbol is present.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => self.coeffs.get(ONE).cloned(),
            _ => None,
        }
    }

    pub fn coeff(&self, label: &str) -> BigRational {
        self.coeffs.get(label).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &BigRational)> {
        self.coeffs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut s = Self::zero();
        for (k, v) in &self.coeffs {
            s.add_term(k, v * q);
        }
        s
    }

    /// Float rendering from the basis decimals.
    pub fn to_f64(&self, basis: &Basis) -> Result<f64> {
        let mut acc = 0.0;
        for (k, q) in &self.coeffs {
            let v = basis.value(k).ok_or_else(|| Error::UnknownSymbol(k.clone()))?;
            acc += rational_to_f64(q) * v;
        }
        Ok(acc)
    }

    /// Exact product, using the basis product table.
    pub fn mul(&self, other: &Self, basis: &Basis) -> Result<Self> {
        let mut out = Self::zero();
        for (a, qa) in &self.coeffs {
            for (b, qb) in &other.coeffs {
                let prod = basis.symbol_product(a, b)?;
                let q = qa * qb;
                for (k, v) in prod.coeffs {
                    out.add_term(&k, v * &q);
                }
            }
        }
        Ok(out)
    }
}

impl Add for &SymbolicReal {
    type Output = SymbolicReal;
    fn add(self, rhs: &SymbolicReal) -> SymbolicReal {
        let mut s = self.clone();
        for (k, v) in &rhs.coeffs {
            s.add_term(k, v.clone());
        }
        s
    }
}

impl Sub for &SymbolicReal {
    type Output = SymbolicReal;
    fn sub(self, rhs: &SymbolicReal) -> SymbolicReal {
        self + &(-rhs)
    }
}

impl Neg for &SymbolicReal {
    type Output = SymbolicReal;
    fn neg(self) -> SymbolicReal {
        self.scale(&-BigRational::one())
    }
}

impl Mul<&BigRational> for &SymbolicReal {
    type Output = SymbolicReal;
    fn mul(self, rhs: &BigRational) -> SymbolicReal {
        self.scale(rhs)
    }
}

impl fmt::Display for SymbolicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        // Unit term first, then symbols in label order.
        let mut terms: Vec<(&String, &BigRational)> = self.coeffs.iter().collect();
        terms.sort_by_key(|(k, _)| (k.as_str() != ONE, k.as_str()));
        for (i, (k, q)) in terms.into_iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if k == ONE {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "{}*{k}", fmt_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl FromStr for SymbolicReal {
    type Err = Error;

    /// Accepts sums like `1 + √2`, `2 - 3/2*√3`, `-0.5√6`, `pi`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(s.to_string());
        let mut out = SymbolicReal::zero();
        let mut rest = s.trim();
        if rest.is_empty() {
            return Err(err());
        }
        let mut first = true;
        while !rest.is_empty() {
            let mut sign = BigRational::one();
            if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r.trim_start();
            } else if let Some(r) = rest.strip_prefix('+') {
                rest = r.trim_start();
            } else if !first {
                return Err(err());
            }
            first = false;
            // Term extends to the next top-level sign that is not an exponent sign.
            let bytes: Vec<(usize, char)> = rest.char_indices().collect();
            let mut end = rest.len();
            for (j, &(idx, c)) in bytes.iter().enumerate() {
                if j == 0 || !(c == '+' || c == '-') {
                    continue;
                }
                let prev = bytes[j - 1].1;
                if prev == 'e' || prev == 'E' {
                    let before = if j >= 2 { bytes[j - 2].1 } else { ' ' };
                    if before.is_ascii_digit() || before == '.' {
                        continue;
                    }
                }
                end = idx;
                break;
            }
            let term = rest[..end].trim();
            rest = rest[end..].trim_start();
            let (coeff, label) = parse_term(term).ok_or_else(err)?;
            out.add_term(&label, coeff * &sign);
        }
        Ok(out)
    }
}

fn parse_term(term: &str) -> Option<(BigRational, String)> {
    if term.is_empty() {
        return None;
    }
    if let Ok(q) = parse_rational(term) {
        return Some((q, ONE.to_string()));
    }
    // Split a leading numeric coefficient from the symbol.
    let split = term
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || c == '.' || c == '/'))
        .map(|(i, _)| i)
        .unwrap_or(term.len());
    let (num, sym) = term.split_at(split);
    let sym = sym.trim_start_matches('*').trim();
    let num = num.trim().trim_end_matches('/');
    let coeff = if num.is_empty() {
        BigRational::one()
    } else {
        parse_rational(num).ok()?
    };
    if sym.is_empty()
        || !sym.chars().all(is_symbol_char)
        || sym.starts_with(|c: char| c.is_ascii_digit())
    {
        return None;
    }
    Some((coeff, sym.to_string()))
}

/// Outcome of an exact rational-independence test.
#[derive(Debug, Clone, PartialEq)]
pub enum Independence {
    Independent,
    /// Nonzero primitive integer vector `q` with `Σ q_i·vals_i = 0` exactly.
    Dependent(Vec<BigRational>),
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

/// Decides whether `vals` are linearly independent over the rationals.
///
/// Builds the coefficient matrix (rows: symbols, columns: values) and returns
/// the first kernel vector as a relation certificate when one exists.
pub fn rationally_independent(vals: &[SymbolicReal]) -> Result<Independence> {
    if vals.is_empty() {
        return Err(Error::EmptyInput("values"));
    }
    let mut labels: Vec<&str> = vals.iter().flat_map(|v| v.symbols()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.is_empty() {
        // Every value is zero.
        let mut q = vec![BigRational::zero(); vals.len()];
        q[0] = BigRational::one();
        return Ok(Independence::Dependent(q));
    }
    let rows: Vec<Vec<BigRational>> = labels
        .iter()
        .map(|l| vals.iter().map(|v| v.coeff(l)).collect())
        .collect();
    let m = RationalMatrix::from_rows(rows)?;
    Ok(match rational_kernel(&m).into_iter().next() {
        None => Independence::Independent,
        Some(q) => Independence::Dependent(primitive(q)),
    })
}

/// Same as [`rationally_independent`] but every value must live in `basis`.
pub fn rationally_independent_in(basis: &Basis, vals: &[SymbolicReal]) -> Result<Independence> {
    basis.check_members(vals)?;
    rationally_independent(vals)
}

/// Exact check of a relation certificate.
pub fn relation_holds(vals: &[SymbolicReal], q: &[BigRational]) -> bool {
    vals.len() == q.len()
        && q.iter().any(|c| !c.is_zero())
        && vals
            .iter()
            .zip(q)
            .fold(SymbolicReal::zero(), |acc, (v, c)| &acc + &v.scale(c))
            .is_zero()
}
