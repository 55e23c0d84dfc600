//! Finite-resolution witnesses for regional proximality of order `d`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::systems::SystemHandle;

/// Certificate `(x', y', g)` for `(x, y) ∈ RP^[d]` at resolution `delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RPWitness {
    pub x_prime: Vec<f64>,
    pub y_prime: Vec<f64>,
    pub g: Vec<f64>,
    pub delta: f64,
}

impl RPWitness {
    pub fn d(&self) -> usize {
        self.g.len()
    }

    /// Witness for the swapped pair.
    pub fn mirrored(&self) -> Self {
        Self {
            x_prime: self.y_prime.clone(),
            y_prime: self.x_prime.clone(),
            g: self.g.clone(),
            delta: self.delta,
        }
    }
}

/// Times `g^(ε) = Σ ε_i g_i` for `ε = 1 … 2^d − 1`, indexed by `ε − 1` with
/// `ε = Σ ε_i 2^(i−1)`.
pub fn face_times(g: &[f64]) -> Vec<f64> {
    let faces = (1usize << g.len()) - 1;
    (1..=faces)
        .map(|e| {
            g.iter()
                .enumerate()
                .filter(|(i, _)| e >> i & 1 == 1)
                .map(|(_, t)| t)
                .sum()
        })
        .collect()
}

/// Strict check of both base inequalities and all `2^d − 1` face inequalities.
pub fn rp_witness_verify(
    sys: &SystemHandle,
    x: &[f64],
    y: &[f64],
    w: &RPWitness,
    delta: f64,
) -> Result<bool> {
    let n = sys.point_dim();
    for p in [x, y, &w.x_prime, &w.y_prime] {
        if p.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                got: p.len(),
            });
        }
    }
    if w.g.is_empty() {
        return Err(Error::ArityMismatch {
            expected: 1,
            got: 0,
        });
    }
    for &t in &w.g {
        sys.check_time(t)?;
    }
    if !(sys.dist(x, &w.x_prime) < delta && sys.dist(y, &w.y_prime) < delta) {
        return Ok(false);
    }
    Ok(face_times(&w.g).into_iter().all(|t| {
        sys.dist(
            &sys.evolve_unchecked(&w.x_prime, t),
            &sys.evolve_unchecked(&w.y_prime, t),
        ) < delta
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStats {
    /// `(g, x', y')` candidates examined.
    pub candidates: u64,
    pub g_tuples: u64,
    pub perturbations: usize,
    pub quantum: f64,
    pub fine_quantum: Option<f64>,
    /// Smallest worst-face distance seen, in units of `δ`.
    pub best_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        witness: RPWitness,
        stats: SearchStats,
    },
    /// Budget spent without a witness; not a proof of non-membership.
    Exhausted(SearchStats),
    /// An invariant 1-Lipschitz pseudo-distance is at least `3δ`.
    ProvenAbsent {
        lower_bound: f64,
    },
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }

    pub fn witness(&self) -> Option<&RPWitness> {
        match self {
            SearchOutcome::Found { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SearchOutcome::Found { .. } => "found",
            SearchOutcome::Exhausted(_) => "exhausted",
            SearchOutcome::ProvenAbsent { .. } => "proven-absent",
        }
    }

    pub fn stats(&self) -> Option<&SearchStats> {
        match self {
            SearchOutcome::Found { stats, .. } | SearchOutcome::Exhausted(stats) => Some(stats),
            SearchOutcome::ProvenAbsent { .. } => None,
        }
    }

    pub fn candidates(&self) -> u64 {
        self.stats().map_or(0, |s| s.candidates)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Coarse time step; `None` picks 1 for discrete systems and suspensions,
    /// 0.25 for continuous flows.
    pub quantum: Option<f64>,
    /// Refinement factor of the fine pass.
    pub refine: u32,
    /// Near-miss tuples kept for refinement.
    pub near_misses: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            quantum: None,
            refine: 10,
            near_misses: 8,
        }
    }
}

pub fn default_quantum(sys: &SystemHandle) -> f64 {
    match sys {
        SystemHandle::TorusFlow(_) | SystemHandle::HeisenbergFlow(_) => 0.25,
        _ => 1.0,
    }
}

/// `0, 1, −1, 2, −2, …`
pub(crate) fn rank_to_offset(r: usize) -> i64 {
    let m = r.div_ceil(2) as i64;
    if r % 2 == 1 {
        m
    } else {
        -m
    }
}

/// Tuples of `d` offsets with max-norm exactly `r`, lexicographic in the rank order.
#[cfg(test)]
pub(crate) fn shell(d: usize, r: usize) -> Vec<Vec<i64>> {
    shell_capped(d, r, usize::MAX)
}

/// The first `cap` tuples of [`shell`].
pub(crate) fn shell_capped(d: usize, r: usize, cap: usize) -> Vec<Vec<i64>> {
    if r == 0 {
        return vec![vec![0; d]];
    }
    let hi = 2 * r;
    let mut out = Vec::new();
    let mut ranks = vec![0usize; d];
    loop {
        if ranks.iter().any(|&k| k + 1 >= hi) {
            if out.len() == cap {
                return out;
            }
            out.push(ranks.iter().map(|&k| rank_to_offset(k)).collect());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if ranks[i] < hi {
                ranks[i] += 1;
                break;
            }
            ranks[i] = 0;
        }
    }
}

/// Points within `δ` of `x` on a fixed lattice, the unperturbed point first.
fn perturbations(sys: &SystemHandle, x: &[f64], delta: f64, levels: &[f64]) -> Result<Vec<Vec<f64>>> {
    let dim = x.len();
    let c = 0.9 * delta / (dim as f64).sqrt();
    let steps: Vec<f64> = levels.iter().map(|l| l * c).collect();
    let total = steps.len().pow(dim as u32);
    let space = sys.space();
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut p = x.to_vec();
        for c in p.iter_mut().rev() {
            *c += steps[rem % steps.len()];
            rem /= steps.len();
        }
        let p = space.canonicalize(&p)?;
        if sys.dist(x, &p) < delta {
            out.push(p);
        }
    }
    Ok(out)
}

struct Ctx<'a> {
    sys: &'a SystemHandle,
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
    delta: f64,
}

struct TupleEval {
    found: Option<(usize, usize)>,
    best: f64,
    examined: u64,
}

impl Ctx<'_> {
    fn pairs(&self) -> u64 {
        (self.xs.len() * self.ys.len()) as u64
    }

    fn eval(&self, g: &[f64], limit: u64) -> TupleEval {
        let faces = face_times(g);
        let ev = |pts: &[Vec<f64>]| -> Vec<Vec<Vec<f64>>> {
            faces
                .iter()
                .map(|&t| pts.iter().map(|p| self.sys.evolve_unchecked(p, t)).collect())
                .collect()
        };
        let ex = ev(&self.xs);
        let ey = ev(&self.ys);
        let mut best = f64::INFINITY;
        let mut examined = 0u64;
        for i in 0..self.xs.len() {
            for j in 0..self.ys.len() {
                if examined == limit {
                    return TupleEval {
                        found: None,
                        best,
                        examined,
                    };
                }
                examined += 1;
                let mut worst = 0.0f64;
                for f in 0..faces.len() {
                    worst = worst.max(self.sys.dist(&ex[f][i], &ey[f][j]));
                    if worst >= best {
                        break;
                    }
                }
                if worst < best {
                    best = worst;
                }
                if worst < self.delta {
                    return TupleEval {
                        found: Some((i, j)),
                        best,
                        examined,
                    };
                }
            }
        }
        TupleEval {
            found: None,
            best,
            examined,
        }
    }
}

/// Tuples evaluated concurrently per batch.
const BATCH: usize = 64;

struct Pass<'a> {
    ctx: &'a Ctx<'a>,
    budget: u64,
    used: u64,
    tuples: u64,
    best: f64,
    keep: usize,
    misses: Vec<(f64, u64, Vec<f64>)>,
}

impl Pass<'_> {
    /// Evaluates `gs` in order; returns the first verified witness.
    fn run(&mut self, gs: &[Vec<f64>]) -> Option<RPWitness> {
        for batch in gs.chunks(BATCH) {
            let per = self.ctx.pairs();
            let mut limits = Vec::with_capacity(batch.len());
            let mut room = self.budget - self.used;
            for _ in batch {
                if room == 0 {
                    break;
                }
                let l = per.min(room);
                limits.push(l);
                room -= l;
            }
            let evals: Vec<TupleEval> = batch[..limits.len()]
                .par_iter()
                .zip(&limits)
                .map(|(g, &l)| self.ctx.eval(g, l))
                .collect();
            for (k, e) in evals.into_iter().enumerate() {
                self.used += e.examined;
                self.tuples += 1;
                self.best = self.best.min(e.best);
                if let Some((i, j)) = e.found {
                    return Some(RPWitness {
                        x_prime: self.ctx.xs[i].clone(),
                        y_prime: self.ctx.ys[j].clone(),
                        g: batch[k].clone(),
                        delta: self.ctx.delta,
                    });
                }
                self.note_miss(e.best, &batch[k]);
            }
            if self.used >= self.budget {
                break;
            }
        }
        None
    }

    fn note_miss(&mut self, score: f64, g: &[f64]) {
        if self.keep == 0 || !score.is_finite() {
            return;
        }
        self.misses.push((score, self.tuples, g.to_vec()));
        self.misses
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.misses.truncate(self.keep);
    }

    fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    /// Upper bound on the tuples the remaining budget can pay for.
    fn affordable(&self) -> usize {
        let per = self.ctx.pairs().max(1);
        usize::try_from((self.budget - self.used).div_ceil(per)).unwrap_or(usize::MAX)
    }
}

/// Searches for `(x', y', g)` witnessing `(x, y) ∈ RP^[d]` at resolution `δ`.
///
/// Tuples are scanned coarse-to-fine on a time grid in shells of growing
/// max-norm; ties break lexicographically on (tuple, x' index, y' index).
pub fn rp_witness_search(
    sys: &SystemHandle,
    x: &[f64],
    y: &[f64],
    d: usize,
    delta: f64,
    budget: u64,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "must be positive"));
    }
    if d < 1 {
        return Err(invalid("d", "must be at least 1"));
    }
    if d > 16 {
        return Err(invalid("d", "at most 16 faces directions"));
    }
    if budget == 0 {
        return Err(invalid("budget", "must be positive"));
    }
    sys.check_point(x)?;
    sys.check_point(y)?;
    let x = sys.canonicalize(x)?;
    let y = sys.canonicalize(y)?;

    let lower = sys.invariant_lower_bound(&x, &y);
    if lower >= 3.0 * delta {
        return Ok(SearchOutcome::ProvenAbsent { lower_bound: lower });
    }

    let quantum = opts.quantum.unwrap_or_else(|| default_quantum(sys));
    if !(quantum > 0.0 && quantum.is_finite()) {
        return Err(invalid("quantum", "must be positive"));
    }
    if sys.is_discrete() && quantum.fract() != 0.0 {
        return Err(invalid("quantum", "discrete systems need an integer step"));
    }

    let dim = x.len() as u32;
    let full = [0.0, 0.5, -0.5, 1.0, -1.0];
    let coarse_levels = [0.0, 1.0, -1.0];
    let levels: &[f64] = if 5u64.pow(2 * dim) * 16 > budget {
        &coarse_levels
    } else {
        &full
    };
    let ctx = Ctx {
        sys,
        xs: perturbations(sys, &x, delta, levels)?,
        ys: perturbations(sys, &y, delta, levels)?,
        delta,
    };
    let refine = !sys.is_discrete() && opts.refine > 1;
    let coarse_budget = if refine { budget.div_ceil(2) } else { budget };
    let mut pass = Pass {
        ctx: &ctx,
        budget: coarse_budget,
        used: 0,
        tuples: 0,
        best: f64::INFINITY,
        keep: if refine { opts.near_misses } else { 0 },
        misses: Vec::new(),
    };
    let stats = |p: &Pass, fine: Option<f64>| SearchStats {
        candidates: p.used,
        g_tuples: p.tuples,
        perturbations: ctx.xs.len().max(ctx.ys.len()),
        quantum,
        fine_quantum: fine,
        best_ratio: p.best / delta,
    };

    let mut r = 0;
    while !pass.exhausted() {
        let gs: Vec<Vec<f64>> = shell_capped(d, r, pass.affordable())
            .into_iter()
            .map(|o| o.into_iter().map(|k| k as f64 * quantum).collect())
            .collect();
        if let Some(w) = pass.run(&gs) {
            let s = stats(&pass, None);
            return Ok(SearchOutcome::Found { witness: w, stats: s });
        }
        r += 1;
    }
    if !refine {
        return Ok(SearchOutcome::Exhausted(stats(&pass, None)));
    }

    let fine = quantum / opts.refine as f64;
    let radius = (opts.refine / 2) as usize;
    let centers = std::mem::take(&mut pass.misses);
    pass.budget = budget;
    pass.keep = 0;
    for (_, _, center) in &centers {
        for r in 1..=radius {
            let gs: Vec<Vec<f64>> = shell_capped(d, r, pass.affordable())
                .into_iter()
                .map(|o| {
                    o.into_iter()
                        .zip(center)
                        .map(|(k, c)| c + k as f64 * fine)
                        .collect()
                })
                .collect();
            if let Some(w) = pass.run(&gs) {
                let s = stats(&pass, Some(fine));
                return Ok(SearchOutcome::Found { witness: w, stats: s });
            }
            if pass.exhausted() {
                return Ok(SearchOutcome::Exhausted(stats(&pass, Some(fine))));
            }
        }
    }
    Ok(SearchOutcome::Exhausted(stats(&pass, Some(fine))))
}
