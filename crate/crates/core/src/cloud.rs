//! Finite point clouds in `X^m`, Hausdorff comparison and cell coverage.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::systems::{circle_dist, Space, SystemHandle, SystemTag};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub system: SystemTag,
    pub operation: String,
    pub budget: u64,
    pub seed: u64,
}

/// Tuples of `arity` canonical points, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    space: Space,
    arity: usize,
    data: Vec<f64>,
    provenance: Provenance,
}

impl PointCloud {
    pub fn new(space: Space, arity: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if arity == 0 {
            return Err(invalid("arity", "must be at least 1"));
        }
        let w = arity * space.point_dim();
        if !data.len().is_multiple_of(w) {
            return Err(Error::DimensionMismatch {
                expected: w,
                got: data.len() % w,
            });
        }
        if !data.iter().all(|c| (0.0..1.0).contains(c)) {
            return Err(invalid("cloud", "entries must be canonical"));
        }
        Ok(Self {
            space,
            arity,
            data,
            provenance,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn point_dim(&self) -> usize {
        self.space.point_dim()
    }

    /// Flat width of one tuple.
    pub fn width(&self) -> usize {
        self.arity * self.point_dim()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width())
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Max over entries of the space metric.
    pub fn tuple_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.point_dim();
        a.chunks_exact(n)
            .zip(b.chunks_exact(n))
            .map(|(p, q)| self.space.dist(p, q))
            .fold(0.0, f64::max)
    }
}

/// Cloud of `T^t x` for each listed time, in order.
pub fn orbit_sample(sys: &SystemHandle, x: &[f64], times: &[f64], seed: u64) -> Result<PointCloud> {
    sys.check_point(x)?;
    let x = sys.canonicalize(x)?;
    let ts: Vec<f64> = times
        .iter()
        .map(|&t| sys.check_time(t))
        .collect::<Result<_>>()?;
    let data: Vec<f64> = ts
        .par_iter()
        .flat_map_iter(|&t| sys.evolve_unchecked(&x, t))
        .collect();
    PointCloud::new(
        sys.space(),
        1,
        data,
        Provenance {
            system: sys.tag(),
            operation: "orbit".into(),
            budget: times.len() as u64,
            seed,
        },
    )
}

/// Largest grid side used for torus acceleration.
const MAX_CELLS_PER_AXIS: usize = 256;

struct TorusGrid<'a> {
    cloud: &'a PointCloud,
    k: usize,
    cells: HashMap<u64, Vec<u32>>,
}

impl<'a> TorusGrid<'a> {
    fn build(cloud: &'a PointCloud) -> Option<Self> {
        let dims = cloud.width();
        let n = cloud.len().max(1) as f64;
        let k = (n.powf(1.0 / dims as f64).floor() as usize).clamp(1, MAX_CELLS_PER_AXIS);
        // keys must fit in u64
        if (k as f64).powi(dims as i32) >= 1.8e19 {
            return None;
        }
        let mut cells: HashMap<u64, Vec<u32>> = HashMap::new();
        for (i, t) in cloud.tuples().enumerate() {
            cells.entry(Self::key_of(t, k)).or_default().push(i as u32);
        }
        Some(Self { cloud, k, cells })
    }

    fn cell(c: f64, k: usize) -> usize {
        ((c * k as f64) as usize).min(k - 1)
    }

    fn key_of(t: &[f64], k: usize) -> u64 {
        t.iter()
            .rev()
            .fold(0u64, |acc, &c| acc * k as u64 + Self::cell(c, k) as u64)
    }

    /// Nearest distance from `q` to the cloud under the product max metric.
    fn nearest(&self, q: &[f64]) -> f64 {
        let k = self.k as i64;
        let dims = q.len();
        let h = 1.0 / self.k as f64;
        let home: Vec<i64> = q.iter().map(|&c| Self::cell(c, self.k) as i64).collect();
        let max_r = k / 2 + 1;
        let mut best = f64::INFINITY;
        let mut offs = vec![0i64; dims];
        for r in 0..=max_r {
            // points outside the radius-r block are at least r·h away
            if best <= (r as f64 - 1.0).max(0.0) * h && r > 0 {
                break;
            }
            let span = 2 * r + 1;
            let total = (span as u64).pow(dims as u32);
            for idx in 0..total {
                let mut rem = idx;
                let mut on_shell = false;
                for o in offs.iter_mut() {
                    *o = (rem % span as u64) as i64 - r;
                    rem /= span as u64;
                    on_shell |= o.abs() == r;
                }
                if !on_shell {
                    continue;
                }
                let mut key = 0u64;
                for d in (0..dims).rev() {
                    let c = (home[d] + offs[d]).rem_euclid(k);
                    key = key * k as u64 + c as u64;
                }
                if let Some(ids) = self.cells.get(&key) {
                    for &i in ids {
                        let t = self.cloud.tuple(i as usize);
                        let d = q
                            .iter()
                            .zip(t)
                            .map(|(&a, &b)| circle_dist(a, b))
                            .fold(0.0, f64::max);
                        best = best.min(d);
                    }
                }
            }
            if 2 * r + 1 >= k {
                break;
            }
        }
        best
    }
}

fn directed_brute(a: &PointCloud, b: &PointCloud) -> f64 {
    a.data
        .par_chunks_exact(a.width())
        .map(|p| {
            b.tuples()
                .map(|q| a.tuple_dist(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

fn directed(a: &PointCloud, b: &PointCloud) -> f64 {
    if let (Space::Torus { .. }, Some(grid)) = (&b.space, TorusGrid::build(b)) {
        a.data
            .par_chunks_exact(a.width())
            .map(|p| grid.nearest(p))
            .reduce(|| 0.0, f64::max)
    } else {
        directed_brute(a, b)
    }
}

/// Hausdorff distance under the product max metric.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.arity != b.arity {
        return Err(Error::ArityMismatch {
            expected: a.arity,
            got: b.arity,
        });
    }
    if a.space != b.space {
        return Err(Error::SpaceMismatch);
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// Fraction of the `⌈1/res⌉^dims` cells of `[0,1)^dims` hit by `points`.
pub fn cell_coverage<'a>(
    points: impl Iterator<Item = &'a [f64]>,
    dims: usize,
    resolution: f64,
) -> Result<f64> {
    let mut grid = CellGrid::new(dims, resolution)?;
    for p in points {
        grid.mark(p);
    }
    Ok(grid.coverage())
}

/// Occupancy of the uniform cells of `[0,1)^dims`.
#[derive(Debug, Clone)]
pub struct CellGrid {
    per_axis: usize,
    dims: usize,
    total: u128,
    dense: Option<Vec<bool>>,
    sparse: std::collections::HashSet<u128>,
    hits: u128,
}

impl CellGrid {
    pub fn new(dims: usize, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution <= 1.0) {
            return Err(invalid("resolution", "must lie in (0, 1]"));
        }
        if dims == 0 {
            return Err(invalid("dims", "must be at least 1"));
        }
        let per_axis = (1.0 / resolution - 1e-9).ceil().max(1.0) as usize;
        let total = (per_axis as u128)
            .checked_pow(dims as u32)
            .ok_or_else(|| invalid("resolution", "too many cells"))?;
        let dense = (total <= 1 << 26).then(|| vec![false; total as usize]);
        Ok(Self {
            per_axis,
            dims,
            total,
            dense,
            sparse: Default::default(),
            hits: 0,
        })
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn key(&self, p: &[f64]) -> u128 {
        let k = self.per_axis;
        p.iter().take(self.dims).rev().fold(0u128, |acc, &c| {
            let i = ((c * k as f64).floor().max(0.0) as usize).min(k - 1);
            acc * k as u128 + i as u128
        })
    }

    pub fn mark(&mut self, p: &[f64]) {
        self.mark_key(self.key(p));
    }

    pub fn mark_key(&mut self, key: u128) {
        let fresh = match &mut self.dense {
            Some(v) => !std::mem::replace(&mut v[key as usize], true),
            None => self.sparse.insert(key),
        };
        if fresh {
            self.hits += 1;
        }
    }

    pub fn hits(&self) -> u128 {
        self.hits
    }

    pub fn coverage(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prov() -> Provenance {
        Provenance {
            system: SystemTag::TorusMap,
            operation: "test".into(),
            budget: 0,
            seed: 0,
        }
    }

    fn torus_cloud(dim: usize, arity: usize, data: Vec<f64>) -> PointCloud {
        PointCloud::new(Space::Torus { dim }, arity, data, prov()).unwrap()
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, w: usize) -> Vec<f64> {
        (0..n * w).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn hausdorff_basics() {
        let a = torus_cloud(1, 1, vec![0.1]);
        let b = torus_cloud(1, 1, vec![0.9]);
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let c = torus_cloud(1, 2, vec![0.1, 0.2]);
        assert!(matches!(hausdorff_distance(&a, &c), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn grid_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (dim, arity, n) in [(1, 1, 500), (1, 2, 2000), (2, 2, 3000), (1, 4, 1500)] {
            let a = torus_cloud(dim, arity, random_cloud(&mut rng, n, dim * arity));
            let b = torus_cloud(dim, arity, random_cloud(&mut rng, n / 2, dim * arity));
            let fast = directed(&a, &b);
            let slow = directed_brute(&a, &b);
            assert_eq!(fast, slow, "dim {dim} arity {arity}");
        }
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = torus_cloud(2, 1, random_cloud(&mut rng, 30, 2));
            let b = torus_cloud(2, 1, random_cloud(&mut rng, 40, 2));
            let c = torus_cloud(2, 1, random_cloud(&mut rng, 50, 2));
            let ab = hausdorff_distance(&a, &b).unwrap();
            let bc = hausdorff_distance(&b, &c).unwrap();
            let ac = hausdorff_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
            assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        }
    }

    #[test]
    fn dense_cloud_against_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dense = torus_cloud(2, 1, random_cloud(&mut rng, 100_000, 2));
        let grid: Vec<f64> = (0..100)
            .flat_map(|i| (0..100).flat_map(move |j| [i as f64 / 100.0, j as f64 / 100.0]))
            .collect();
        let grid = torus_cloud(2, 1, grid);
        assert!(hausdorff_distance(&dense, &grid).unwrap() <= 0.02);
    }

    #[test]
    fn orbit_examples() {
        let s = SystemHandle::torus_map(vec![1.0 / 3.0]).unwrap();
        let c = orbit_sample(&s, &[0.05], &[0.0], 0).unwrap();
        assert_eq!(c.tuple(0), &[0.05]);
        let times: Vec<f64> = (0..30).map(f64::from).collect();
        let c = orbit_sample(&s, &[0.05], &times, 0).unwrap();
        let mut distinct: Vec<f64> = Vec::new();
        for t in c.tuples() {
            if distinct.iter().all(|d| circle_dist(*d, t[0]) > 1e-9) {
                distinct.push(t[0]);
            }
        }
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn minimal_orbit_fills_circle() {
        let s = SystemHandle::torus_flow(vec![2f64.sqrt()]).unwrap();
        let times: Vec<f64> = (0..100_000).map(|k| k as f64 * 0.1).collect();
        let c = orbit_sample(&s, &[0.0], &times, 0).unwrap();
        let cov = cell_coverage(c.tuples(), 1, 0.01).unwrap();
        assert_eq!(cov, 1.0);
    }

    #[test]
    fn coverage_counts() {
        let pts = [[0.01], [0.02], [0.51]];
        let cov = cell_coverage(pts.iter().map(|p| &p[..]), 1, 0.05).unwrap();
        assert!((cov - 0.1).abs() < 1e-12);
        assert!(CellGrid::new(1, 0.0).is_err());
    }
}
