//! Point meshes of spherical balls and their lifts under a rational map.
//!
//! A ball is meshed by concentric rings. Lifting a mesh solves `g(z) = v`
//! for every vertex `v`, joins each preimage of an edge end to the nearest
//! preimage of the other end, and splits the result into connected
//! components. Each component is again a mesh and can be lifted further.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::rational::RationalMap;
use crate::error::{Error, Result};
use crate::sphere::{spherical_distance, SpherePoint};

/// A second-nearest preimage closer than this factor times the nearest one
/// marks an edge whose lift is ambiguous.
pub const AMBIGUITY_RATIO: f64 = 2.0;

/// Preimages closer than this coincide (multiple roots).
const SAME_POINT: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<SpherePoint>,
    pub edges: Vec<[u32; 2]>,
    /// Vertex of the original ball mesh each vertex lies over.
    pub base_vertex: Vec<u32>,
    /// Vertex of the parent mesh each vertex lies over.
    pub parent_vertex: Vec<u32>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Index of the vertex nearest to `q`.
    pub fn nearest(&self, q: SpherePoint) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, &v) in self.vertices.iter().enumerate() {
            let d = spherical_distance(v, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

/// Ring index of each vertex of a ball mesh with `rings` rings.
pub fn ring_of(rings: usize) -> Vec<u16> {
    let mut out = vec![0u16];
    for k in 1..=rings {
        out.extend(std::iter::repeat(k as u16).take(6 * k));
    }
    out
}

fn ring_start(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        1 + 3 * k * (k - 1)
    }
}

/// Mesh of the open ball `B(center, radius)`: the centre and rings
/// `k = 1..=rings` of `6k` points at distance `0.999 radius k / rings`.
pub fn ball_mesh(center: SpherePoint, radius: f64, rings: usize) -> Mesh {
    let (e1, e2) = center.tangent_frame();
    let mut vertices = vec![center];
    let mut edges: Vec<[u32; 2]> = Vec::new();
    for k in 1..=rings {
        let rho = 0.999 * radius * k as f64 / rings as f64;
        let m = 6 * k;
        for j in 0..m {
            let a = 2.0 * PI * j as f64 / m as f64;
            let (s, c) = a.sin_cos();
            let u = [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]];
            vertices.push(center.geodesic(u, rho));
            let here = (ring_start(k) + j) as u32;
            edges.push([here, (ring_start(k) + (j + 1) % m) as u32]);
            if k == 1 {
                edges.push([0, here]);
            } else {
                let inner = 6 * (k - 1);
                let j_in = ((j * (k - 1)) as f64 / k as f64).round() as usize % inner;
                edges.push([here, (ring_start(k - 1) + j_in) as u32]);
            }
        }
        if k > 1 {
            let inner = 6 * (k - 1);
            for j in 0..inner {
                let j_out = ((j * k) as f64 / (k - 1) as f64).round() as usize % m;
                edges.push([(ring_start(k - 1) + j) as u32, (ring_start(k) + j_out) as u32]);
            }
        }
    }
    for e in edges.iter_mut() {
        if e[0] > e[1] {
            e.swap(0, 1);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let n = vertices.len() as u32;
    Mesh { vertices, edges, base_vertex: (0..n).collect(), parent_vertex: (0..n).collect() }
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n as u32).collect())
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let p = self.0[x as usize];
            self.0[x as usize] = self.0[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi as usize] = lo;
        }
    }
}

/// Components of `g^{-1}` of a mesh.
pub struct Lift {
    pub children: Vec<Mesh>,
    /// Degree of `g` on each child.
    pub local_degrees: Vec<usize>,
    /// `table[v * d + i]`: child and child vertex of the `i`-th preimage of
    /// parent vertex `v`.
    pub table: Vec<(u32, u32)>,
}

/// Lifts `parent` through `map`. Fails with `ResolutionInsufficient` when a
/// lifted edge is ambiguous between two components or a component does not
/// cover every parent vertex equally often.
pub fn lift(map: &RationalMap, parent: &Mesh) -> Result<Lift> {
    let d = map.degree();
    let nv = parent.len();
    let pre: Vec<Vec<SpherePoint>> = parent.vertices.par_iter().map(|&v| map.preimages(v)).collect::<Result<_>>()?;
    let pos = |node: usize| pre[node / d][node % d];
    let mut uf = UnionFind::new(nv * d);
    for (v, ps) in pre.iter().enumerate() {
        for i in 0..d {
            for j in i + 1..d {
                if spherical_distance(ps[i], ps[j]) <= SAME_POINT {
                    uf.union((v * d + i) as u32, (v * d + j) as u32);
                }
            }
        }
    }
    let links: Vec<(u32, u32, Option<u32>)> = parent
        .edges
        .par_iter()
        .flat_map_iter(|&[u, v]| {
            let (u, v) = (u as usize, v as usize);
            let mut out = Vec::with_capacity(2 * d);
            for (a, b) in [(u, v), (v, u)] {
                for i in 0..d {
                    let p = pre[a][i];
                    let dist: Vec<f64> = pre[b].iter().map(|&q| spherical_distance(p, q)).collect();
                    let j1 = (0..d).fold(0, |m, j| if dist[j] < dist[m] { j } else { m });
                    let second = (0..d)
                        .filter(|&j| spherical_distance(pre[b][j], pre[b][j1]) > SAME_POINT)
                        .min_by(|&x, &y| dist[x].total_cmp(&dist[y]));
                    let amb = second.filter(|&j2| dist[j2] < AMBIGUITY_RATIO * dist[j1]).map(|j2| (b * d + j2) as u32);
                    out.push(((a * d + i) as u32, (b * d + j1) as u32, amb));
                }
            }
            out
        })
        .collect();
    for &(a, b, _) in &links {
        uf.union(a, b);
    }
    for &(a, _, amb) in &links {
        if let Some(c) = amb {
            if uf.find(a) != uf.find(c) {
                let p = pos(a as usize);
                return Err(Error::ResolutionInsufficient(format!(
                    "edge lift near ({:.4}, {:.4}, {:.4}) is ambiguous between two components",
                    p.0[0], p.0[1], p.0[2]
                )));
            }
        }
    }
    // components in order of their smallest node
    let mut comp_of_root = vec![u32::MAX; nv * d];
    let mut comp = vec![0u32; nv * d];
    let mut count = 0u32;
    for node in 0..nv * d {
        let r = uf.find(node as u32) as usize;
        if comp_of_root[r] == u32::MAX {
            comp_of_root[r] = count;
            count += 1;
        }
        comp[node] = comp_of_root[r];
    }
    let nc = count as usize;
    let mut local = vec![usize::MAX; nc];
    for v in 0..nv {
        let mut c = vec![0usize; nc];
        for i in 0..d {
            c[comp[v * d + i] as usize] += 1;
        }
        for k in 0..nc {
            if local[k] == usize::MAX {
                local[k] = c[k];
            } else if local[k] != c[k] {
                return Err(Error::ResolutionInsufficient(format!(
                    "component {k} covers parent vertices unevenly ({} and {})",
                    local[k], c[k]
                )));
            }
        }
    }
    let mut children: Vec<Mesh> = (0..nc)
        .map(|_| Mesh { vertices: Vec::new(), edges: Vec::new(), base_vertex: Vec::new(), parent_vertex: Vec::new() })
        .collect();
    let mut table = vec![(0u32, 0u32); nv * d];
    for node in 0..nv * d {
        let c = comp[node] as usize;
        let v = node / d;
        table[node] = (c as u32, children[c].vertices.len() as u32);
        children[c].vertices.push(pos(node));
        children[c].base_vertex.push(parent.base_vertex[v]);
        children[c].parent_vertex.push(v as u32);
    }
    for &(a, b, _) in &links {
        let (ca, ia) = table[a as usize];
        let (_, ib) = table[b as usize];
        let e = if ia < ib { [ia, ib] } else { [ib, ia] };
        if ia != ib {
            children[ca as usize].edges.push(e);
        }
    }
    for ch in children.iter_mut() {
        ch.edges.sort_unstable();
        ch.edges.dedup();
    }
    Ok(Lift { children, local_degrees: local, table })
}

/// Spherical diameter of the given vertices.
pub fn diameter_of(points: &[SpherePoint]) -> f64 {
    points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| points[i + 1..].iter().map(|&q| spherical_distance(p, q)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// Vertices of `mesh` lying over ring `k` of the base ball mesh.
pub fn over_ring(mesh: &Mesh, rings: &[u16], k: usize) -> Vec<SpherePoint> {
    mesh.vertices
        .iter()
        .zip(&mesh.base_vertex)
        .filter(|(_, &b)| rings[b as usize] as usize == k)
        .map(|(&p, _)| p)
        .collect()
}
