//! Julia set samples by backward iteration from a repelling fixed point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rational::RationalMap;
use crate::error::Result;
use crate::metric::FiniteMetricSpace;
use crate::sphere::{spherical_distance, SpherePoint};

/// Points closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JuliaSample {
    pub points: Vec<SpherePoint>,
    pub depth: usize,
    pub seed: SpherePoint,
    pub seed_multiplier: f64,
    /// Largest distance from a sample point to its nearest neighbour.
    pub mesh: f64,
    /// Largest distance from `g(p)` to the nearest sample point.
    pub invariance_error: f64,
}

impl JuliaSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spherical distance matrix.
    pub fn space(&self) -> FiniteMetricSpace {
        let p = &self.points;
        FiniteMetricSpace::from_fn(p.len(), |i, j| spherical_distance(p[i], p[j]))
            .with_coords(p.iter().map(|q| q.0.to_vec()).collect())
    }
}

/// Drops points within `DEDUP_TOL` of an earlier one; order is kept.
fn dedup(points: Vec<SpherePoint>) -> Vec<SpherePoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0[0].total_cmp(&points[b].0[0]).then(a.cmp(&b)));
    let mut keep = vec![true; points.len()];
    for (k, &i) in order.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        for &j in &order[k + 1..] {
            if points[j].0[0] - points[i].0[0] > DEDUP_TOL {
                break;
            }
            if keep[j] && spherical_distance(points[i], points[j]) <= DEDUP_TOL {
                if j < i {
                    keep[i] = false;
                    break;
                }
                keep[j] = false;
            }
        }
    }
    points.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

/// Greedy farthest-point subsample of `count` points, starting from the first.
pub fn farthest_point_prune(points: &[SpherePoint], count: usize) -> Vec<SpherePoint> {
    if count >= points.len() || count == 0 {
        return points.to_vec();
    }
    let mut chosen = vec![0usize];
    let mut near: Vec<f64> = points.iter().map(|&p| spherical_distance(p, points[0])).collect();
    while chosen.len() < count {
        let (k, _) = near.iter().enumerate().fold((0, -1.0), |b, (i, &d)| if d > b.1 { (i, d) } else { b });
        chosen.push(k);
        for (i, v) in near.iter_mut().enumerate() {
            *v = v.min(spherical_distance(points[i], points[k]));
        }
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| points[i]).collect()
}

/// Index of the sample point nearest to `q`, ties to the lowest index.
pub fn nearest(points: &[SpherePoint], q: SpherePoint) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, spherical_distance(p, q)))
        .fold((0, f64::INFINITY), |b, t| if t.1 < b.1 { t } else { b })
}

/// `g^{-depth}` of the repelling fixed point with the largest multiplier,
/// optionally pruned to `target` points.
pub fn julia_sample(map: &RationalMap, depth: usize, target: Option<usize>) -> Result<JuliaSample> {
    let (seed, seed_multiplier) = map.repelling_seed()?;
    let mut points = vec![seed];
    for _ in 0..depth {
        let next: Vec<Vec<SpherePoint>> = points.par_iter().map(|&p| map.preimages(p)).collect::<Result<_>>()?;
        let mut all = points.clone();
        all.extend(next.into_iter().flatten());
        points = dedup(all);
    }
    if let Some(t) = target {
        points = farthest_point_prune(&points, t);
    }
    let mesh = if points.len() < 2 {
        0.0
    } else {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &p)| {
                points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| spherical_distance(p, q)).fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
    };
    let invariance_error = points.par_iter().map(|&p| nearest(&points, map.apply(p)).1).reduce(|| 0.0, f64::max);
    Ok(JuliaSample { points, depth, seed, seed_multiplier, mesh, invariance_error })
}

/// `φ(p)`: the sample point nearest to `g(p)`, with the largest projection error.
pub fn map_on_sample(map: &RationalMap, points: &[SpherePoint]) -> (Vec<usize>, f64) {
    let r: Vec<(usize, f64)> = points.par_iter().map(|&p| nearest(points, map.apply(p))).collect();
    let err = r.iter().map(|t| t.1).fold(0.0, f64::max);
    (r.into_iter().map(|t| t.0).collect(), err)
}
