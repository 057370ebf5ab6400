//! The tile graph of a cover sequence: vertices are tiles of all levels, edges
//! join distinct intersecting tiles whose levels differ by at most one.
//!
//! Gromov products with base point the level-0 tile are kept doubled, so
//! every quantity here is an integer.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverSequence, TileId};
use crate::error::{Error, Result};
use crate::proximity::ProximityTable;
use crate::report::Verdict;

/// Vertex count above which exact triple scans are refused.
pub const EXACT_TRIPLE_CAP: usize = 400;

const UNREACHED: u16 = u16::MAX;

#[derive(Clone, Debug)]
pub struct TileGraph {
    /// First vertex index of each level.
    offsets: Vec<usize>,
    vertices: Vec<TileId>,
    adj: Vec<Vec<usize>>,
    dist: Vec<u16>,
}

impl TileGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[TileId] {
        &self.vertices
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn vertex(&self, id: TileId) -> Result<usize> {
        match self.offsets.get(id.level) {
            Some(&o) if o + id.index < self.offsets[id.level + 1] => Ok(o + id.index),
            _ => Err(Error::UnknownTile { level: id.level, index: id.index }),
        }
    }

    /// Level `|X|` of vertex `v`.
    pub fn level(&self, v: usize) -> usize {
        self.vertices[v].level
    }

    /// Combinatorial distance `|X - Y|`.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.dist[a * self.len() + b] as usize
    }

    pub fn checked_distance(&self, a: usize, b: usize) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.distance(a, b))
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// `2 (X·Y) = |X| + |Y| - |X - Y|`.
    pub fn gromov_doubled(&self, a: usize, b: usize) -> i64 {
        (self.level(a) + self.level(b)) as i64 - self.distance(a, b) as i64
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().map(|&d| d as usize).max().unwrap_or(0)
    }

    /// Adjacency export.
    pub fn export(&self) -> GraphExport {
        let mut edges = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb.iter().filter(|&&b| b > a) {
                edges.push([a, b]);
            }
        }
        GraphExport {
            vertices: self.vertices.iter().map(|t| ExportVertex { level: t.level, tile: t.index }).collect(),
            edges,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportVertex {
    pub level: usize,
    pub tile: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphExport {
    pub vertices: Vec<ExportVertex>,
    pub edges: Vec<[usize; 2]>,
}

/// Builds the graph and all BFS distances.
pub fn build_tile_graph(cover: &CoverSequence) -> TileGraph {
    let mut offsets = vec![0];
    let mut vertices = Vec::new();
    for n in 0..=cover.depth() {
        for i in 0..cover.level(n).len() {
            vertices.push(TileId::new(n, i));
        }
        offsets.push(vertices.len());
    }
    let v = vertices.len();
    let idx = cover.index();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); v];
    for n in 0..=cover.depth() {
        for (i, nb) in idx.adjacent[n].iter().enumerate() {
            adj[offsets[n] + i].extend(nb.iter().map(|&j| offsets[n] + j));
        }
        if n < cover.depth() {
            for (i, j) in cover.meeting_pairs(n, n + 1) {
                adj[offsets[n] + i].push(offsets[n + 1] + j);
                adj[offsets[n + 1] + j].push(offsets[n] + i);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let mut dist = vec![UNREACHED; v * v];
    dist.par_chunks_mut(v.max(1)).enumerate().for_each(|(s, row)| {
        row[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if row[w] == UNREACHED {
                    row[w] = row[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    });
    TileGraph { offsets, vertices, adj, dist }
}

/// Gromov product `(X·Y)`, a half-integer.
pub fn gromov_product(graph: &TileGraph, a: usize, b: usize) -> Result<f64> {
    graph.check(a)?;
    graph.check(b)?;
    Ok(graph.gromov_doubled(a, b) as f64 / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperbolicityMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperbolicity {
    /// Smallest `C` with `(X·Y) >= min((X·Z), (Z·Y)) - C`.
    pub constant: f64,
    pub doubled: i64,
    /// Set in sampled mode: the constant is only a lower bound.
    pub lower_bound_only: bool,
    pub triples: u64,
    pub witness: Option<(usize, usize, usize)>,
}

/// Base-point hyperbolicity constant of the graph.
pub fn hyperbolicity_constant(graph: &TileGraph, mode: HyperbolicityMode) -> Result<Hyperbolicity> {
    let v = graph.len();
    let p: Vec<i64> = (0..v * v).map(|i| graph.gromov_doubled(i / v, i % v)).collect();
    let excess = |x: usize, y: usize, z: usize| p[x * v + z].min(p[z * v + y]) - p[x * v + y];
    match mode {
        HyperbolicityMode::Exact => {
            if v > EXACT_TRIPLE_CAP {
                return Err(Error::TripleBudgetExceeded { vertices: v, cap: EXACT_TRIPLE_CAP });
            }
            let best = (0..v)
                .into_par_iter()
                .map(|x| {
                    let mut best = (0i64, None);
                    for y in x..v {
                        for z in 0..v {
                            let e = excess(x, y, z);
                            if e > best.0 {
                                best = (e, Some((x, y, z)));
                            }
                        }
                    }
                    best
                })
                .reduce(|| (0, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1.is_some() && (a.1.is_none() || b.1 < a.1)) { b } else { a });
            Ok(Hyperbolicity {
                constant: best.0 as f64 / 2.0,
                doubled: best.0,
                lower_bound_only: false,
                triples: (v * (v + 1) / 2 * v) as u64,
                witness: best.1,
            })
        }
        HyperbolicityMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = (0i64, None);
            for _ in 0..samples {
                let (x, y, z) = (rng.gen_range(0..v), rng.gen_range(0..v), rng.gen_range(0..v));
                let e = excess(x, y, z);
                if e > best.0 {
                    best = (e, Some((x, y, z)));
                }
            }
            Ok(Hyperbolicity {
                constant: best.0 as f64 / 2.0,
                doubled: best.0,
                lower_bound_only: true,
                triples: samples as u64,
                witness: best.1,
            })
        }
    }
}

/// `m(X, Y)` for every pair of vertices, from floored point values; the
/// sentinel survives only for `X = Y` a single point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedProximity {
    pub n: usize,
    pub values: Vec<u8>,
    pub sentinel: usize,
}

impl ExtendedProximity {
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.values[a * self.n + b] as usize
    }
}

pub fn extended_proximity_table(graph: &TileGraph, cover: &CoverSequence, table: &ProximityTable) -> ExtendedProximity {
    let v = graph.len();
    let np = table.n_points;
    let f = table.floored();
    // per point x and vertex Y: min over y ∈ Y of m(x, y)
    let mut to_tile = vec![0u8; np * v];
    to_tile.par_chunks_mut(v.max(1)).enumerate().for_each(|(x, row)| {
        let fx = &f[x * np..(x + 1) * np];
        for (b, id) in graph.vertices().iter().enumerate() {
            row[b] = cover.tile(*id).iter().map(|&y| fx[y]).min().unwrap();
        }
    });
    let mut values = vec![0u8; v * v];
    values.par_chunks_mut(v.max(1)).enumerate().for_each(|(a, row)| {
        let members = cover.tile(graph.vertices()[a]);
        for (b, out) in row.iter_mut().enumerate() {
            *out = members.iter().map(|&x| to_tile[x * v + b]).min().unwrap();
        }
    });
    ExtendedProximity { n: v, values, sentinel: table.sentinel() }
}

/// `m(X, Y)` for two tiles.
pub fn extended_proximity(cover: &CoverSequence, table: &ProximityTable, x: TileId, y: TileId) -> Result<usize> {
    let a = cover.get_tile(x)?;
    let b = cover.get_tile(y)?;
    Ok(a.iter().flat_map(|&p| b.iter().map(move |&q| table.floor(p, q))).min().unwrap())
}

/// Largest `min(m(X,Z), m(Z,Y)) - m(X,Y)` over vertex triples.
pub fn extended_triangle_excess(ext: &ExtendedProximity) -> i64 {
    let v = ext.n;
    (0..v)
        .into_par_iter()
        .map(|x| {
            let rx = &ext.values[x * v..(x + 1) * v];
            let mut best = i64::MIN;
            for y in x..v {
                let ry = &ext.values[y * v..(y + 1) * v];
                let top = rx.iter().zip(ry).map(|(&a, &b)| a.min(b)).max().unwrap() as i64;
                best = best.max(top - rx[y] as i64);
            }
            best
        })
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GromovComparison {
    /// `max |(X·Y) - m(X,Y)|` over pairs with finite `m`.
    pub constant: f64,
    pub doubled: i64,
    /// Constant of `|X|+|Y|-2m(X,Y) - C <= |X-Y| <= |X|+|Y|-2m(X,Y) + C`.
    pub levgr: i64,
    pub witness: Option<(usize, usize)>,
    /// Largest excess in the extended triangle inequality for `m(X,Y)`.
    pub triangle_excess: Option<i64>,
}

/// Compares Gromov products with the extended proximity over all vertex
/// pairs. The triangle excess is computed when the graph is within the exact
/// triple budget.
pub fn compare_m_gromov(graph: &TileGraph, cover: &CoverSequence, table: &ProximityTable) -> GromovComparison {
    let ext = extended_proximity_table(graph, cover, table);
    let v = graph.len();
    let best = (0..v)
        .into_par_iter()
        .map(|a| {
            let mut best = (0i64, None);
            for b in a..v {
                let m = ext.get(a, b);
                if m == ext.sentinel {
                    continue;
                }
                let e = (graph.gromov_doubled(a, b) - 2 * m as i64).abs();
                if e > best.0 || best.1.is_none() && e == best.0 {
                    best = (e, Some((a, b)));
                }
            }
            best
        })
        .reduce(|| (0, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && a.1.is_none()) { b } else { a });
    let triangle_excess = (v <= EXACT_TRIPLE_CAP).then(|| extended_triangle_excess(&ext));
    GromovComparison { constant: best.0 as f64 / 2.0, doubled: best.0, levgr: best.0, witness: best.1, triangle_excess }
}

/// `V_r(X)`: points of all tiles within graph distance `r` of `X`.
pub fn cluster(graph: &TileGraph, cover: &CoverSequence, x: usize, r: usize) -> Result<Vec<usize>> {
    graph.check(x)?;
    let mut pts: Vec<usize> = (0..graph.len())
        .filter(|&y| graph.distance(x, y) <= r)
        .flat_map(|y| cover.tile(graph.vertices()[y]).iter().cloned())
        .collect();
    pts.sort_unstable();
    pts.dedup();
    Ok(pts)
}

/// Levels `{V_r(X) : X ∈ X^n}`, keeping the tile order of `cover`.
pub fn cluster_cover_sequence(graph: &TileGraph, cover: &CoverSequence, r: usize) -> Result<CoverSequence> {
    let levels = (0..=cover.depth())
        .map(|n| {
            (0..cover.level(n).len())
                .into_par_iter()
                .map(|i| cluster(graph, cover, graph.vertex(TileId::new(n, i)).unwrap(), r).unwrap())
                .collect()
        })
        .collect();
    CoverSequence::new(cover.n_points(), cover.width, cover.lambda, levels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMapCheck {
    pub r: usize,
    /// Pairs violating `|X-Y| <= (2r+1)|V-V'|`.
    pub lower_violations: usize,
    /// Pairs violating `(2r+1)|V-V'| <= |X-Y| + 2r + 1`.
    pub upper_violations: usize,
    /// Smallest slack `(2r+1)|V-V'| - |X-Y|` and its pair.
    pub lower_tight: Option<(i64, usize, usize)>,
    /// Smallest slack `|X-Y| + 2r + 1 - (2r+1)|V-V'|` and its pair.
    pub upper_tight: Option<(i64, usize, usize)>,
    pub verdict: Verdict,
}

/// Checks `|X-Y|/(2r+1) <= |V(X)-V(Y)| <= |X-Y|/(2r+1) + 1` over all pairs,
/// in integer form. Vertices of the two graphs correspond by tile id.
pub fn graph_map_check(gx: &TileGraph, gv: &TileGraph, r: usize) -> Result<GraphMapCheck> {
    if gx.vertices() != gv.vertices() {
        return Err(Error::InvalidParameter("graphs have different vertex sets".into()));
    }
    let v = gx.len();
    let s = 2 * r as i64 + 1;
    let mut lower_violations = 0;
    let mut upper_violations = 0;
    let mut lower_tight: Option<(i64, usize, usize)> = None;
    let mut upper_tight: Option<(i64, usize, usize)> = None;
    for a in 0..v {
        for b in a + 1..v {
            let dx = gx.distance(a, b) as i64;
            let dv = gv.distance(a, b) as i64;
            let lo = s * dv - dx;
            let hi = dx + s - s * dv;
            if lo < 0 {
                lower_violations += 1;
            }
            if hi < 0 {
                upper_violations += 1;
            }
            if lower_tight.map_or(true, |t| lo < t.0) {
                lower_tight = Some((lo, a, b));
            }
            if upper_tight.map_or(true, |t| hi < t.0) {
                upper_tight = Some((hi, a, b));
            }
        }
    }
    Ok(GraphMapCheck {
        r,
        lower_violations,
        upper_violations,
        lower_tight,
        upper_tight,
        verdict: Verdict::from_bool(lower_violations == 0 && upper_violations == 0),
    })
}
