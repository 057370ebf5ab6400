//! Cover sequences `X^0, X^1, …, X^N` of a finite point set.
//!
//! A tile is a sorted list of point indices. Tiles are identified by their
//! level and position within the level; equal point sets at one level stay
//! distinct tiles.

use std::collections::VecDeque;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::util::BitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileId {
    pub level: usize,
    pub index: usize,
}

impl TileId {
    pub fn new(level: usize, index: usize) -> Self {
        TileId { level, index }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoverSequence {
    pub width: usize,
    pub lambda: Option<f64>,
    levels: Vec<Vec<Vec<usize>>>,
    #[serde(skip)]
    n_points: usize,
    #[serde(skip)]
    index: OnceLock<CoverIndex>,
}

impl Clone for CoverSequence {
    fn clone(&self) -> Self {
        CoverSequence {
            width: self.width,
            lambda: self.lambda,
            levels: self.levels.clone(),
            n_points: self.n_points,
            index: OnceLock::new(),
        }
    }
}

impl PartialEq for CoverSequence {
    fn eq(&self, o: &Self) -> bool {
        self.width == o.width && self.lambda == o.lambda && self.levels == o.levels && self.n_points == o.n_points
    }
}

/// Per-level lookup tables derived from a cover.
#[derive(Debug)]
pub struct CoverIndex {
    /// `containing[n][p]`: tiles of level `n` containing point `p`.
    pub containing: Vec<Vec<Vec<usize>>>,
    /// `adjacent[n][i]`: other tiles of level `n` meeting tile `i`.
    pub adjacent: Vec<Vec<Vec<usize>>>,
}

impl CoverSequence {
    /// Validates and builds a cover of `n_points` points. Members are sorted
    /// and deduplicated.
    pub fn new(n_points: usize, width: usize, lambda: Option<f64>, mut levels: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if let Some(l) = lambda {
            if !(l > 1.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {l}")));
            }
        }
        if levels.is_empty() {
            return Err(Error::InvalidCover("no levels".into()));
        }
        for level in levels.iter_mut() {
            for t in level.iter_mut() {
                t.sort_unstable();
                t.dedup();
            }
        }
        if levels[0].len() != 1 || levels[0][0].len() != n_points {
            return Err(Error::InvalidCover("level 0 must be the single tile of all points".into()));
        }
        for (n, level) in levels.iter().enumerate() {
            if level.is_empty() {
                return Err(Error::EmptyLevel(n));
            }
            let mut seen = vec![false; n_points];
            for (i, t) in level.iter().enumerate() {
                if t.is_empty() {
                    return Err(Error::InvalidCover(format!("tile ({n}, {i}) is empty")));
                }
                for &p in t {
                    if p >= n_points {
                        return Err(Error::InvalidCover(format!("tile ({n}, {i}) has point {p} out of range")));
                    }
                    seen[p] = true;
                }
            }
            if let Some(p) = seen.iter().position(|s| !s) {
                return Err(Error::CoverGap { point: p, level: n });
            }
        }
        Ok(CoverSequence { width, lambda, levels, n_points, index: OnceLock::new() })
    }

    /// Restores the point count after deserialization and validates.
    pub fn revalidated(self, n_points: usize) -> Result<Self> {
        CoverSequence::new(n_points, self.width, self.lambda, self.levels)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Truncation depth `N`: the last level index.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Vec<usize>>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &[Vec<usize>] {
        &self.levels[n]
    }

    pub fn tile(&self, id: TileId) -> &[usize] {
        &self.levels[id.level][id.index]
    }

    pub fn get_tile(&self, id: TileId) -> Result<&[usize]> {
        self.levels
            .get(id.level)
            .and_then(|l| l.get(id.index))
            .map(|t| t.as_slice())
            .ok_or(Error::UnknownTile { level: id.level, index: id.index })
    }

    pub fn tile_count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    pub fn with_width(&self, width: usize) -> Self {
        let mut c = self.clone();
        c.width = width;
        c
    }

    pub fn with_lambda(&self, lambda: Option<f64>) -> Self {
        let mut c = self.clone();
        c.lambda = lambda;
        c
    }

    /// First `depth + 1` levels.
    pub fn truncated(&self, depth: usize) -> Self {
        let mut c = self.clone();
        c.levels.truncate(depth + 1);
        c
    }

    pub fn index(&self) -> &CoverIndex {
        self.index.get_or_init(|| CoverIndex::build(self))
    }

    /// Tiles of level `n` reachable from `tile` by a chain of at most `w`
    /// intersecting steps, sorted.
    pub fn u_w_neighborhood(&self, id: TileId, w: usize) -> Result<Vec<usize>> {
        self.get_tile(id)?;
        let mut out = chain_ball(&self.index().adjacent[id.level], id.index, w);
        out.sort_unstable();
        Ok(out)
    }

    /// Point set of `U_w(X)`.
    pub fn u_w_points(&self, id: TileId, w: usize) -> Result<Vec<usize>> {
        let tiles = self.u_w_neighborhood(id, w)?;
        let mut pts: Vec<usize> = tiles.iter().flat_map(|&i| self.levels[id.level][i].iter().cloned()).collect();
        pts.sort_unstable();
        pts.dedup();
        Ok(pts)
    }

    /// For each tile of level `n`, the set of tiles `Y` of that level with
    /// `U_w(X) ∩ U_w(Y) ≠ ∅`, i.e. chain distance at most `2w + 1`.
    pub(crate) fn proximate_sets(&self, n: usize, w: usize) -> Vec<BitSet> {
        let adj = &self.index().adjacent[n];
        (0..adj.len())
            .into_par_iter()
            .map(|i| {
                let mut b = BitSet::new(adj.len());
                for j in chain_ball(adj, i, 2 * w + 1) {
                    b.insert(j);
                }
                b
            })
            .collect()
    }

    /// Pairs `(i, j)` of tiles at levels `a` and `b` that share a point,
    /// sorted and deduplicated.
    pub fn meeting_pairs(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let idx = self.index();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for p in 0..self.n_points {
            for &i in &idx.containing[a][p] {
                for &j in &idx.containing[b][p] {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Diameter of every tile, level by level.
    pub fn diameters(&self, space: &FiniteMetricSpace) -> Vec<Vec<f64>> {
        self.levels.iter().map(|l| l.par_iter().map(|t| space.set_diam(t)).collect()).collect()
    }
}

impl CoverIndex {
    fn build(cover: &CoverSequence) -> Self {
        let n = cover.n_points;
        let containing: Vec<Vec<Vec<usize>>> = cover
            .levels
            .iter()
            .map(|level| {
                let mut c = vec![Vec::new(); n];
                for (i, t) in level.iter().enumerate() {
                    for &p in t {
                        c[p].push(i);
                    }
                }
                c
            })
            .collect();
        let adjacent = cover
            .levels
            .iter()
            .zip(&containing)
            .map(|(level, cont)| {
                let mut adj: Vec<Vec<usize>> = vec![Vec::new(); level.len()];
                for tiles in cont {
                    for &i in tiles {
                        for &j in tiles {
                            if i != j {
                                adj[i].push(j);
                            }
                        }
                    }
                }
                for a in adj.iter_mut() {
                    a.sort_unstable();
                    a.dedup();
                }
                adj
            })
            .collect();
        CoverIndex { containing, adjacent }
    }
}

/// Vertices within `depth` steps of `start` in an adjacency list, in BFS order.
pub(crate) fn chain_ball(adj: &[Vec<usize>], start: usize, depth: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    dist[start] = 0;
    while let Some(u) = queue.pop_front() {
        if dist[u] == depth {
            continue;
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                out.push(v);
                queue.push_back(v);
            }
        }
    }
    out
}
