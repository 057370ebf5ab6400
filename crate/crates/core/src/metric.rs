//! Finite metric spaces, separated nets and scale probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Additive slack allowed in the triangle inequality.
pub const TRIANGLE_SLACK: f64 = 1e-9;

/// A finite set of points `0..n` with a distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    coords: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<String>>,
}

impl FiniteMetricSpace {
    /// Builds a space from a square matrix and validates every axiom.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, len: r.len(), n });
            }
        }
        let space = FiniteMetricSpace { n, dist: rows.into_iter().flatten().collect(), coords: None, labels: None };
        space.validate()?;
        Ok(space)
    }

    /// Builds a space from a distance function known to be a metric.
    /// Nothing is validated.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let mut dist = vec![0.0; n * n];
        dist.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                if i != j {
                    *v = f(i.min(j), i.max(j));
                }
            }
        });
        FiniteMetricSpace { n, dist, coords: None, labels: None }
    }

    /// Wraps a flat row-major matrix without validation.
    pub fn from_flat_unchecked(n: usize, dist: Vec<f64>) -> Self {
        assert_eq!(dist.len(), n * n);
        FiniteMetricSpace { n, dist, coords: None, labels: None }
    }

    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Self {
        self.coords = Some(coords);
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Row-major distance matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn diam(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Smallest distance between distinct points (infinite for one point).
    pub fn min_distance(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut m = f64::INFINITY;
                for j in 0..self.n {
                    if i != j {
                        m = m.min(self.d(i, j));
                    }
                }
                m
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Largest nearest-neighbour distance.
    pub fn resolution(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| (0..self.n).filter(|&j| j != i).map(|j| self.d(i, j)).fold(f64::INFINITY, f64::min))
            .filter(|v| v.is_finite())
            .reduce(|| 0.0, f64::max)
    }

    /// Diameter of a subset.
    pub fn set_diam(&self, members: &[usize]) -> f64 {
        let mut m: f64 = 0.0;
        for (a, &x) in members.iter().enumerate() {
            let row = self.row(x);
            for &y in &members[a + 1..] {
                m = m.max(row[y]);
            }
        }
        m
    }

    /// Distance between two subsets.
    pub fn set_dist(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut m = f64::INFINITY;
        for &x in a {
            let row = self.row(x);
            for &y in b {
                m = m.min(row[y]);
            }
        }
        m
    }

    /// Checks the metric axioms and reports the first violation found
    /// in row-major order.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(Error::NonZeroDiagonal(i));
            }
            for j in 0..n {
                let v = self.d(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::BadEntry(i, j));
                }
                if v != self.d(j, i) {
                    return Err(Error::NonSymmetric(i.min(j), i.max(j)));
                }
                if i != j && v == 0.0 {
                    return Err(Error::ZeroOffDiagonal(i.min(j), i.max(j)));
                }
            }
        }
        let bad = (0..n).into_par_iter().find_map_first(|i| {
            for j in i + 1..n {
                let dij = self.d(i, j);
                for k in 0..n {
                    if dij > self.d(i, k) + self.d(k, j) + TRIANGLE_SLACK {
                        return Some((i, j, k));
                    }
                }
            }
            None
        });
        match bad {
            Some((i, j, k)) => Err(Error::TriangleViolation(i, j, k)),
            None => Ok(()),
        }
    }

    /// Same distances after relabelling: point `i` of the result is point
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        FiniteMetricSpace::from_fn(self.n, |i, j| self.d(perm[i], perm[j]))
    }
}

/// A separated subset of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub delta: f64,
    pub members: Vec<usize>,
    pub maximal: bool,
}

/// Greedy maximal `delta`-separated subset in ascending index order.
pub fn maximal_separated_net(space: &FiniteMetricSpace, delta: f64) -> Net {
    let mut members: Vec<usize> = Vec::new();
    for p in 0..space.len() {
        let row = space.row(p);
        if members.iter().all(|&m| row[m] >= delta) {
            members.push(p);
        }
    }
    Net { delta, members, maximal: true }
}

/// Result of [`doubling_probe`]: the largest separated count and the ball
/// that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingProbe {
    pub count: usize,
    pub center: usize,
    pub radius: f64,
    pub balls: usize,
}

/// Size of a greedy `lambda * radius`-separated subset of the open ball
/// `B(center, radius)`.
pub fn doubling_count(space: &FiniteMetricSpace, center: usize, radius: f64, lambda: f64) -> usize {
    let sep = lambda * radius;
    let row = space.row(center);
    let mut chosen: Vec<usize> = Vec::new();
    for p in 0..space.len() {
        if row[p] < radius {
            let rp = space.row(p);
            if chosen.iter().all(|&c| rp[c] >= sep) {
                chosen.push(p);
            }
        }
    }
    chosen.len()
}

/// Dyadic radius grid from the diameter down to the smallest distance.
pub fn dyadic_radii(space: &FiniteMetricSpace) -> Vec<f64> {
    let diam = space.diam();
    let floor = space.min_distance();
    let mut radii = Vec::new();
    let mut r = diam;
    while r > 0.0 && (radii.is_empty() || r >= floor) {
        radii.push(r);
        r *= 0.5;
    }
    if radii.is_empty() {
        radii.push(1.0);
    }
    radii
}

/// Largest number of `lambda * r`-separated points inside a ball `B(x, r)`,
/// over the first `sample_balls` balls of the enumeration (radius-major over
/// the dyadic grid, then centers ascending). `sample_balls = 0` scans all.
pub fn doubling_probe(space: &FiniteMetricSpace, lambda: f64, sample_balls: usize) -> DoublingProbe {
    let radii = dyadic_radii(space);
    let n = space.len();
    let total = radii.len() * n;
    let balls = if sample_balls == 0 { total } else { sample_balls.min(total) };
    let best = (0..balls)
        .into_par_iter()
        .map(|b| {
            let (ri, c) = (b / n, b % n);
            (doubling_count(space, c, radii[ri], lambda), std::cmp::Reverse(b))
        })
        .max()
        .map(|(c, b)| (c, b.0));
    match best {
        Some((count, b)) => DoublingProbe { count, center: b % n, radius: radii[b / n], balls },
        None => DoublingProbe { count: n.min(1), center: 0, radius: 0.0, balls: 0 },
    }
}

/// Result of [`uniform_perfectness_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformPerfectness {
    pub lambda: f64,
    pub center: usize,
    pub radius: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub grid_ratio: f64,
    pub radii: usize,
}

/// Ratio between consecutive radii of the uniform-perfectness grid.
pub const UP_GRID_RATIO: f64 = 1.1;

/// Largest `lambda` such that every annulus `{y : lambda r < d(x,y) <= r}`
/// on the radius grid is non-empty. The grid runs geometrically from the
/// diameter down to twice the sample resolution.
pub fn uniform_perfectness_probe(space: &FiniteMetricSpace) -> UniformPerfectness {
    let n = space.len();
    let diam = space.diam();
    if n < 2 {
        return UniformPerfectness {
            lambda: 1.0,
            center: 0,
            radius: 0.0,
            r_min: 0.0,
            r_max: 0.0,
            grid_ratio: UP_GRID_RATIO,
            radii: 0,
        };
    }
    let r_min = (2.0 * space.resolution()).min(diam);
    let mut radii = vec![diam];
    while let Some(&r) = radii.last() {
        let next = r / UP_GRID_RATIO;
        if next < r_min {
            break;
        }
        radii.push(next);
    }
    let (lambda, center, ri) = (0..n)
        .into_par_iter()
        .map(|x| {
            let row = space.row(x);
            let mut best = (f64::INFINITY, x, 0usize);
            for (k, &r) in radii.iter().enumerate() {
                let reach = row.iter().filter(|&&d| d <= r).cloned().fold(0.0, f64::max);
                let l = reach / r;
                if l < best.0 {
                    best = (l, x, k);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, 0),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    UniformPerfectness {
        lambda,
        center,
        radius: radii[ri],
        r_min: *radii.last().unwrap(),
        r_max: diam,
        grid_ratio: UP_GRID_RATIO,
        radii: radii.len(),
    }
}
