//! The embedding `j*(g_1, g_2) = (g_1^{C(α_j,1)} · g_2^{C(α_j,2)})_j` of the
//! Heisenberg group and its center into `G^k`, and membership in its range.

use serde::Serialize;

use crate::algebra::binom_f64;
use crate::error::{invalid, Error, Result};
use crate::systems::{heis_multiply, heis_power, HeisenbergElement};

/// Tolerance for the center test on `g_2`.
const CENTER_TOL: f64 = 1e-12;

fn check_alphas(alphas: &[f64]) -> Result<()> {
    for (i, a) in alphas.iter().enumerate() {
        if !a.is_finite() || *a == 0.0 {
            return Err(invalid("alphas", "multipliers must be finite and nonzero"));
        }
        if alphas[..i].contains(a) {
            return Err(Error::RepeatedAlphas);
        }
    }
    Ok(())
}

/// Component `j` is `g_1^{C(α_j,1)} · g_2^{C(α_j,2)}`; `k ≤ 2` and `g_2` central.
pub fn jstar_embed(g: &[HeisenbergElement], alphas: &[f64]) -> Result<Vec<HeisenbergElement>> {
    if g.is_empty() {
        return Err(Error::EmptyInput("g"));
    }
    if g.len() > 2 {
        return Err(invalid("k", "the Heisenberg group is 2-step; k must be at most 2"));
    }
    if alphas.len() != g.len() {
        return Err(Error::ArityMismatch {
            expected: g.len(),
            got: alphas.len(),
        });
    }
    check_alphas(alphas)?;
    if g.iter().any(|h| !h.is_finite()) {
        return Err(invalid("g", "non-finite coordinate"));
    }
    if let Some(g2) = g.get(1) {
        if !g2.is_central(CENTER_TOL) {
            return Err(Error::NotCentral(format!("({}, {}, {})", g2.x, g2.y, g2.z)));
        }
    }
    Ok(alphas
        .iter()
        .map(|&a| {
            g.iter()
                .enumerate()
                .fold(HeisenbergElement::IDENTITY, |acc, (i, gi)| {
                    heis_multiply(&acc, &heis_power(gi, binom_f64(a, i as u32 + 1)))
                })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub preimage: Option<[HeisenbergElement; 2]>,
    /// Largest coordinate gap between the input and `j*` of the solved preimage.
    pub residual: f64,
}

/// Whether `(h_1, h_2)` lies in the range of `j*`, by level-wise elimination.
///
/// Level 1 fits `h_j.xy = α_j · g_1.xy` by least squares. Level 2 then solves
/// `h_j.z − C(α_j,2)·x_1·y_1 = α_j·z_1 + C(α_j,2)·z_2`, whose determinant
/// `α_1 α_2 (α_2 − α_1)/2` is nonzero for distinct nonzero multipliers.
pub fn gtilde_star_membership(tuple: &[HeisenbergElement], alphas: &[f64], tol: f64) -> Result<Membership> {
    if tuple.len() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            got: tuple.len(),
        });
    }
    if alphas.len() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            got: alphas.len(),
        });
    }
    check_alphas(alphas)?;
    if !(tol >= 0.0) {
        return Err(invalid("tol", "must be non-negative"));
    }
    let norm: f64 = alphas.iter().map(|a| a * a).sum();
    let x1 = alphas.iter().zip(tuple).map(|(a, h)| a * h.x).sum::<f64>() / norm;
    let y1 = alphas.iter().zip(tuple).map(|(a, h)| a * h.y).sum::<f64>() / norm;

    let b: Vec<f64> = alphas.iter().map(|&a| binom_f64(a, 2)).collect();
    let rhs: Vec<f64> = tuple.iter().zip(&b).map(|(h, bj)| h.z - bj * x1 * y1).collect();
    let det = alphas[0] * b[1] - alphas[1] * b[0];
    assert!(det != 0.0, "level-2 system singular for distinct nonzero multipliers");
    let z1 = (rhs[0] * b[1] - rhs[1] * b[0]) / det;
    let z2 = (alphas[0] * rhs[1] - alphas[1] * rhs[0]) / det;

    let g1 = HeisenbergElement::new(x1, y1, z1);
    let g2 = HeisenbergElement::central(z2);
    let image = jstar_embed(&[g1, g2], alphas)?;
    let residual = image
        .iter()
        .zip(tuple)
        .map(|(a, b)| a.max_gap(b))
        .fold(0.0, f64::max);
    let member = residual <= tol;
    Ok(Membership {
        member,
        preimage: member.then_some([g1, g2]),
        residual,
    })
}

/// Conjugating every component of a range element by `g` stays in the range.
pub fn gtilde_star_conjugation_check(
    g: &HeisenbergElement,
    tuple: &[HeisenbergElement],
    alphas: &[f64],
    tol: f64,
) -> Result<bool> {
    if !gtilde_star_membership(tuple, alphas, tol)?.member {
        return Err(Error::NotMember);
    }
    let conj: Vec<HeisenbergElement> = tuple.iter().map(|h| h.conjugate_by(g)).collect();
    Ok(gtilde_star_membership(&conj, alphas, tol)?.member)
}
