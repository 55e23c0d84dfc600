//! Moving an RP witness between two commuting actions on one space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::witness::{
    default_quantum, rank_to_offset, rp_witness_verify, RPWitness, SearchOutcome,
    SearchStats,
};
use crate::error::{invalid, Error, Result};
use crate::systems::SystemHandle;

/// Sample points used for the commutation check.
pub const COMMUTATION_SAMPLES: usize = 8;
pub const COMMUTATION_TOL: f64 = 1e-10;

const COMMUTATION_SEED: u64 = 0x0c0a_11e5;

/// Largest observed `|T_g T_h p − T_h T_g p|` over seeded sample points.
pub fn commutation_gap(g: &SystemHandle, h: &SystemHandle) -> Result<f64> {
    if g.space() != h.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(COMMUTATION_SEED);
    let n = g.point_dim();
    let mut worst = 0.0f64;
    for _ in 0..COMMUTATION_SAMPLES {
        let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let p = g.canonicalize(&p)?;
        let (s, t) = if g.is_discrete() || h.is_discrete() {
            (1.0, 1.0)
        } else {
            (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
        };
        worst = worst.max(g.commutation_gap(h, &p, s, t));
    }
    Ok(worst)
}

/// Rebuilds an RP witness of `sys_g` as one for the commuting `sys_h`.
///
/// Keeps `x', y'` from the `sys_g` witness and picks `h_1, …, h_d` on
/// `sys_h`'s time grid one level at a time. A level is accepted once every
/// face whose highest index is that level satisfies
/// `d(h^(ε)x', h^(ε)y') < δ_out`, so a completed descent is a witness.
#[allow(clippy::too_many_arguments)]
pub fn commuting_rp_transfer(
    sys_g: &SystemHandle,
    sys_h: &SystemHandle,
    x: &[f64],
    y: &[f64],
    witness_g: &RPWitness,
    delta_out: f64,
    budget: u64,
) -> Result<SearchOutcome> {
    if !(delta_out > 0.0 && delta_out.is_finite()) {
        return Err(invalid("delta_out", "must be positive"));
    }
    if sys_g.space() != sys_h.space() {
        return Err(Error::SpaceMismatch);
    }
    if sys_g == sys_h {
        return Ok(SearchOutcome::Found {
            witness: witness_g.clone(),
            stats: empty_stats(default_quantum(sys_h)),
        });
    }
    let gap = commutation_gap(sys_g, sys_h)?;
    if gap > COMMUTATION_TOL {
        return Err(Error::CommutationViolation { gap });
    }
    if !rp_witness_verify(sys_g, x, y, witness_g, delta_out / 3.0)? {
        return Err(Error::Precondition(
            "witness does not verify at delta_out / 3".into(),
        ));
    }

    let xp = &witness_g.x_prime;
    let yp = &witness_g.y_prime;
    let quantum = default_quantum(sys_h);
    let mut dfs = Dfs {
        sys: sys_h,
        xp,
        yp,
        delta: delta_out,
        quantum,
        budget,
        used: 0,
        h: Vec::new(),
    };
    let d = witness_g.d();
    let found = dfs.descend(d);
    let stats = SearchStats {
        candidates: dfs.used,
        g_tuples: dfs.used,
        perturbations: 1,
        quantum,
        fine_quantum: None,
        best_ratio: f64::NAN,
    };
    if found {
        let w = RPWitness {
            x_prime: xp.clone(),
            y_prime: yp.clone(),
            g: dfs.h,
            delta: delta_out,
        };
        if !rp_witness_verify(sys_h, x, y, &w, delta_out)? {
            return Err(Error::Precondition(
                "transferred witness failed re-verification".into(),
            ));
        }
        return Ok(SearchOutcome::Found { witness: w, stats });
    }
    Ok(SearchOutcome::Exhausted(stats))
}

fn empty_stats(quantum: f64) -> SearchStats {
    SearchStats {
        candidates: 0,
        g_tuples: 0,
        perturbations: 0,
        quantum,
        fine_quantum: None,
        best_ratio: f64::NAN,
    }
}

struct Dfs<'a> {
    sys: &'a SystemHandle,
    xp: &'a [f64],
    yp: &'a [f64],
    delta: f64,
    quantum: f64,
    budget: u64,
    used: u64,
    h: Vec<f64>,
}

impl Dfs<'_> {
    /// Faces whose highest set bit is the newest coordinate.
    fn level_ok(&self) -> bool {
        let i = self.h.len() - 1;
        let lo = 1usize << i;
        let hi = 1usize << (i + 1);
        (lo..hi).all(|e| {
            let t: f64 = self
                .h
                .iter()
                .enumerate()
                .filter(|(k, _)| e >> k & 1 == 1)
                .map(|(_, v)| v)
                .sum();
            let a = self.sys.evolve_unchecked(self.xp, t);
            let b = self.sys.evolve_unchecked(self.yp, t);
            self.sys.dist(&a, &b) < self.delta
        })
    }

    /// Each level scans its grid in the shell order `0, 1, −1, 2, …`, trying at
    /// most `⌈budget^(1/d)⌉` values before backtracking.
    fn descend(&mut self, d: usize) -> bool {
        if self.h.len() == d {
            return true;
        }
        let cap = (self.budget as f64).powf(1.0 / d as f64).ceil() as u64;
        let mut rank = 0usize;
        while (rank as u64) < cap.max(1) && self.used < self.budget {
            let v = rank_to_offset(rank) as f64 * self.quantum;
            rank += 1;
            self.used += 1;
            self.h.push(v);
            if self.level_ok() && self.descend(d) {
                return true;
            }
            self.h.pop();
        }
        false
    }
}
