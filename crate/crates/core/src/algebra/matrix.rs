use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense matrix of exact rationals in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigRational>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput("matrix"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![BigRational::zero(); rows * cols])
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(Vec::len).unwrap_or(0);
        let mut entries = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(n, m, entries)
    }

    /// Convenience constructor from small integers.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&BigRational> {
        if r < self.rows && c < self.cols {
            self.entries.get(r * self.cols + c)
        } else {
            None
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        assert!(r < self.rows && c < self.cols, "matrix index out of bounds");
        self.entries[r * self.cols + c] = v;
    }

    /// Exact product `M v`.
    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.entries[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Reduced row echelon form; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.entries[r * self.cols + col].is_zero())
            else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.entries.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = self.entries[row * self.cols + col].recip();
            for c in col..self.cols {
                let v = &self.entries[row * self.cols + c] * &inv;
                self.entries[row * self.cols + c] = v;
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.entries[r * self.cols + col].clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let v = &self.entries[row * self.cols + c] * &factor;
                    self.entries[r * self.cols + c] -= v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }
}

/// Basis of the right kernel `{v : M v = 0}` over the rationals.
///
/// One vector per free column, normalized to a primitive integer vector whose
/// first nonzero entry is positive. Empty iff the kernel is trivial.
pub fn rational_kernel(m: &RationalMatrix) -> Vec<Vec<BigRational>> {
    let mut reduced = m.clone();
    let pivots = reduced.rref();
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); m.cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -reduced.entries[row * m.cols + f].clone();
            }
            primitive(v)
        })
        .collect()
}

/// Scales a nonzero rational vector to coprime integers with a positive leading entry.
pub fn primitive(v: Vec<BigRational>) -> Vec<BigRational> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * &lcm).to_integer()).collect();
    let gcd = ints
        .iter()
        .fold(BigInt::zero(), |acc, n| acc.gcd(n));
    if gcd.is_zero() {
        return v;
    }
    let sign = match ints.iter().find(|n| !n.is_zero()) {
        Some(n) if n.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|n| BigRational::from_integer(n / &gcd * &sign))
        .collect()
}
