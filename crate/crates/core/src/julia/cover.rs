//! Pull-back covers of a Julia sample and the induced tile covers.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::{ball_mesh, diameter_of, lift, over_ring, ring_of, Mesh};
use super::rational::RationalMap;
use super::sample::{map_on_sample, JuliaSample};
use crate::cover::CoverSequence;
use crate::dynamics::{dynamical_checks, DynamicalOptions};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::report::VerificationReport;
use crate::sphere::{spherical_distance, SpherePoint};
use crate::verify::{derive_rho_tau_nu_padded, verify_quasi_visual, Thresholds};

/// Rings of the initial ball mesh.
pub const DEFAULT_RINGS: usize = 24;
/// Refinement stops once the ring count would exceed this.
pub const MAX_RINGS: usize = 96;

/// One element of `𝕍ⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientRegion {
    pub level: usize,
    /// Index of the parent region at level `n - 1`.
    pub parent: Option<usize>,
    /// Index of the `V¹` ball it descends from.
    pub base: usize,
    /// Degree of `g` from this region onto its parent.
    pub local_degree: usize,
    /// Degree of `g^{n-1}` onto the base ball.
    pub degree: usize,
    /// Mesh vertex count; zero for the whole sphere.
    pub vertices: usize,
    #[serde(with = "crate::report::float")]
    pub diam: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pullback {
    pub radius: f64,
    pub rings: usize,
    pub refinements: usize,
    /// Sample indices of the ball centres of `𝕍¹`.
    pub centers: Vec<usize>,
    /// `regions[n - 1]` is `𝕍ⁿ`.
    pub regions: Vec<Vec<AmbientRegion>>,
    /// `tiles[n - 1][i]`: sample points in `regions[n - 1][i]`.
    pub tiles: Vec<Vec<Vec<usize>>>,
    /// Lifted regions that met no sample point.
    pub dropped: usize,
    /// Largest `σ(g(v), v')` over lifted vertices `v` over parent vertices `v'`.
    #[serde(with = "crate::report::float")]
    pub shift_error: f64,
}

/// Greedy maximal `r₁`-separated set of the sample, in sample order. Every
/// sample point lies within `r₁` of a centre. Distances within relative
/// `1e-9` of `r₁` count as separated.
pub fn admissible_cover(sample: &JuliaSample, r1: f64) -> Vec<usize> {
    if r1 >= PI {
        return vec![0];
    }
    let p = &sample.points;
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..p.len() {
        if centers.iter().all(|&c| spherical_distance(p[i], p[c]) >= r1 * (1.0 - NET_TIE)) {
            centers.push(i);
        }
    }
    centers
}

const NET_TIE: f64 = 1e-9;

enum Shape {
    Sphere,
    Mesh(Mesh),
}

struct Built {
    shape: Shape,
    region: AmbientRegion,
    tile: Vec<usize>,
}

fn shape_diam(shape: &Shape, rings: &[u16], k: usize) -> f64 {
    match shape {
        Shape::Sphere => PI,
        Shape::Mesh(m) => diameter_of(&over_ring(m, rings, k)),
    }
}

fn children_of(
    map: &RationalMap,
    points: &[SpherePoint],
    pre_phi: &[Vec<usize>],
    parent: &Built,
    parent_index: usize,
    ring_index: &[u16],
    rings: usize,
) -> Result<(Vec<Built>, usize, f64)> {
    let d = map.degree();
    let level = parent.region.level + 1;
    let mut members: Vec<usize> = parent.tile.iter().flat_map(|&q| pre_phi[q].iter().copied()).collect();
    members.sort_unstable();
    let mesh = match &parent.shape {
        Shape::Sphere => {
            if members.is_empty() {
                return Ok((Vec::new(), 1, 0.0));
            }
            let region = AmbientRegion {
                level,
                parent: Some(parent_index),
                base: parent.region.base,
                local_degree: d,
                degree: parent.region.degree * d,
                vertices: 0,
                diam: PI,
            };
            return Ok((vec![Built { shape: Shape::Sphere, region, tile: members }], 0, 0.0));
        }
        Shape::Mesh(m) => m,
    };
    let l = lift(map, mesh)?;
    let mut tiles: Vec<Vec<usize>> = vec![Vec::new(); l.children.len()];
    for &p in &members {
        let v = mesh.nearest(map.apply(points[p]));
        let (c, _) = (0..d)
            .map(|i| l.table[v * d + i])
            .min_by(|a, b| {
                let da = spherical_distance(l.children[a.0 as usize].vertices[a.1 as usize], points[p]);
                let db = spherical_distance(l.children[b.0 as usize].vertices[b.1 as usize], points[p]);
                da.total_cmp(&db)
            })
            .unwrap();
        tiles[c as usize].push(p);
    }
    let mut shift: f64 = 0.0;
    let mut out = Vec::new();
    let mut dropped = 0;
    for ((child, tile), ld) in l.children.into_iter().zip(tiles).zip(l.local_degrees) {
        if tile.is_empty() {
            dropped += 1;
            continue;
        }
        for (v, &pv) in child.vertices.iter().zip(&child.parent_vertex) {
            shift = shift.max(spherical_distance(map.apply(*v), mesh.vertices[pv as usize]));
        }
        let shape = Shape::Mesh(child);
        let region = AmbientRegion {
            level,
            parent: Some(parent_index),
            base: parent.region.base,
            local_degree: ld,
            degree: parent.region.degree * ld,
            vertices: match &shape {
                Shape::Mesh(m) => m.len(),
                Shape::Sphere => 0,
            },
            diam: shape_diam(&shape, ring_index, rings),
        };
        out.push(Built { shape, region, tile });
    }
    Ok((out, dropped, shift))
}

fn pullback_with(
    map: &RationalMap,
    sample: &JuliaSample,
    phi: &[usize],
    r1: f64,
    levels: usize,
    rings: usize,
) -> Result<Pullback> {
    let points = &sample.points;
    let centers = admissible_cover(sample, r1);
    let ring_index = ring_of(rings);
    let mut pre_phi: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for (p, &q) in phi.iter().enumerate() {
        pre_phi[q].push(p);
    }
    let mut current: Vec<Built> = if levels == 0 {
        Vec::new()
    } else if r1 >= PI {
        vec![Built {
            shape: Shape::Sphere,
            region: AmbientRegion { level: 1, parent: None, base: 0, local_degree: 1, degree: 1, vertices: 0, diam: PI },
            tile: (0..points.len()).collect(),
        }]
    } else {
        centers
            .par_iter()
            .enumerate()
            .map(|(j, &c)| {
                let tile: Vec<usize> = (0..points.len()).filter(|&p| spherical_distance(points[p], points[c]) < r1).collect();
                let mesh = ball_mesh(points[c], r1, rings);
                let shape = Shape::Mesh(mesh);
                let diam = shape_diam(&shape, &ring_index, rings);
                let vertices = match &shape {
                    Shape::Mesh(m) => m.len(),
                    Shape::Sphere => 0,
                };
                Built {
                    shape,
                    region: AmbientRegion { level: 1, parent: None, base: j, local_degree: 1, degree: 1, vertices, diam },
                    tile,
                }
            })
            .collect()
    };
    let mut regions = Vec::new();
    let mut tiles = Vec::new();
    let mut dropped = 0;
    let mut shift_error: f64 = 0.0;
    for n in 1..=levels {
        if current.is_empty() {
            return Err(Error::EmptyLevel(n));
        }
        regions.push(current.iter().map(|b| b.region.clone()).collect::<Vec<_>>());
        tiles.push(current.iter().map(|b| b.tile.clone()).collect::<Vec<_>>());
        if n == levels {
            break;
        }
        let next: Vec<(Vec<Built>, usize, f64)> = current
            .par_iter()
            .enumerate()
            .map(|(i, b)| children_of(map, points, &pre_phi, b, i, &ring_index, rings))
            .collect::<Result<_>>()?;
        current = Vec::new();
        for (bs, dr, sh) in next {
            current.extend(bs);
            dropped += dr;
            shift_error = shift_error.max(sh);
        }
    }
    Ok(Pullback { radius: r1, rings, refinements: 0, centers, regions, tiles, dropped, shift_error })
}

/// `𝕍¹..𝕍^N` for balls of radius `r1` around an admissible net. The mesh is
/// refined by doubling the ring count while lifting reports
/// `ResolutionInsufficient`, up to `max_rings`.
pub fn pullback_cover(
    map: &RationalMap,
    sample: &JuliaSample,
    phi: &[usize],
    r1: f64,
    levels: usize,
    rings: usize,
    max_rings: usize,
) -> Result<Pullback> {
    if !(r1 > 0.0) {
        return Err(Error::InvalidParameter(format!("cover radius must be positive, got {r1}")));
    }
    if rings == 0 {
        return Err(Error::InvalidParameter("ring count must be positive".into()));
    }
    let mut k = rings;
    let mut refinements = 0;
    loop {
        match pullback_with(map, sample, phi, r1, levels, k) {
            Ok(mut p) => {
                p.refinements = refinements;
                return Ok(p);
            }
            Err(Error::ResolutionInsufficient(_)) if 2 * k <= max_rings => {
                k *= 2;
                refinements += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// `X⁰ = {sample}` and `Xⁿ = {Vⁿ ∩ sample}`.
pub fn induce_tiles(pullback: &Pullback, n_points: usize) -> Result<CoverSequence> {
    let mut levels = vec![vec![(0..n_points).collect::<Vec<_>>()]];
    levels.extend(pullback.tiles.iter().cloned());
    CoverSequence::new(n_points, 1, None, levels)
}

#[derive(Clone, Debug)]
pub struct JuliaCover {
    pub map: RationalMap,
    pub sample: JuliaSample,
    pub space: FiniteMetricSpace,
    /// Nearest-sample-point projection of `g`.
    pub phi: Vec<usize>,
    pub projection_error: f64,
    pub pullback: Pullback,
    pub cover: CoverSequence,
}

impl JuliaCover {
    /// Largest `diam Vⁿ / diam Xⁿ` over all regions.
    pub fn ambient_ratio(&self) -> f64 {
        let mut worst: f64 = 1.0;
        for (n, level) in self.pullback.regions.iter().enumerate() {
            for (r, t) in level.iter().zip(&self.pullback.tiles[n]) {
                let dx = self.space.set_diam(t);
                worst = worst.max(if dx > 0.0 { r.diam / dx } else { f64::INFINITY });
            }
        }
        worst
    }
}

/// Sample, pull-back and induced cover in one step.
pub fn julia_cover(
    map: &RationalMap,
    sample: JuliaSample,
    r1: f64,
    levels: usize,
    rings: usize,
    max_rings: usize,
) -> Result<JuliaCover> {
    let (phi, projection_error) = map_on_sample(map, &sample.points);
    let pullback = pullback_cover(map, &sample, &phi, r1, levels, rings, max_rings)?;
    let cover = induce_tiles(&pullback, sample.len())?;
    let space = sample.space();
    Ok(JuliaCover { map: map.clone(), sample, space, phi, projection_error, pullback, cover })
}

/// Quasi-visual conditions at width 1 together with the dynamical checks.
/// The rates `ρ`, `τ`, `ν` are fitted with tile diameters padded by the
/// sample mesh; the unpadded rates are reported alongside.
pub fn verify_dynamical_qv(jc: &JuliaCover, th: &Thresholds, opts: &DynamicalOptions) -> Result<VerificationReport> {
    let cover = jc.cover.with_width(1);
    let qv = verify_quasi_visual(&jc.space, &cover, th)?;
    let fit = derive_rho_tau_nu_padded(&jc.space, &cover, jc.sample.mesh).ok();
    let mut opts = opts.clone();
    if opts.nu.is_none() {
        opts.nu = fit.as_ref().map(|f| f.nu);
    }
    let dy = dynamical_checks(&jc.space, &cover, &jc.phi, &opts, th)?;
    let unpadded = derive_rho_tau_nu_padded(&jc.space, &cover, 0.0).ok();
    let mut r = VerificationReport::new("dynamical_quasi_visual", cover.depth(), 1, None);
    r.conditions.extend(qv.conditions);
    r.conditions.extend(dy.conditions);
    r.derived.extend(qv.derived);
    r.derived.extend(dy.derived);
    r.notes.extend(qv.notes);
    r.notes.extend(dy.notes);
    if let Some(f) = fit {
        r.derived.insert("rho".into(), f.rho);
        r.derived.insert("tau".into(), f.tau);
        r.derived.insert("nu".into(), f.nu);
    }
    if let Some(f) = unpadded {
        r.derived.insert("rho_unpadded".into(), f.rho);
        r.derived.insert("tau_unpadded".into(), f.tau);
    }
    r.derived.insert("projection_error".into(), jc.projection_error);
    r.derived.insert("sample_mesh".into(), jc.sample.mesh);
    r.derived.insert("invariance_error".into(), jc.sample.invariance_error);
    r.derived.insert("ambient_ratio".into(), jc.ambient_ratio());
    r.derived.insert("shift_error".into(), jc.pullback.shift_error);
    r.derived.insert("rings".into(), jc.pullback.rings as f64);
    r.derived.insert("centers".into(), jc.pullback.centers.len() as f64);
    if jc.pullback.dropped > 0 {
        r.notes.push(format!("{} lifted regions missed the sample and were dropped", jc.pullback.dropped));
    }
    if cover.levels().iter().all(|l| l.len() == 1) {
        r.notes.push("degenerate: every level has a single tile, the conditions hold vacuously".into());
        r.derived.insert("degenerate".into(), 1.0);
    }
    Ok(r.finish())
}
