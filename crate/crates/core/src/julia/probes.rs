//! Degree and distortion probes for ball preimages.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::mesh::{ball_mesh, diameter_of, lift, over_ring, ring_of, Mesh};
use super::rational::RationalMap;
use crate::error::{Error, Result};
use crate::sphere::{spherical_distance, SpherePoint};
use crate::util::ols_slope;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeProbe {
    pub center: SpherePoint,
    pub radius: f64,
    pub rings: usize,
    /// `degrees[k - 1]`: degree of `g^k` on each component of `g^{-k}(B)`.
    pub degrees: Vec<Vec<usize>>,
    pub max_per_level: Vec<usize>,
    pub max: usize,
}

fn degree_probe_with(map: &RationalMap, w0: SpherePoint, r0: f64, n: usize, rings: usize) -> Result<DegreeProbe> {
    let d = map.degree();
    let mut degrees = Vec::new();
    if r0 >= PI {
        for k in 1..=n {
            degrees.push(vec![d.pow(k as u32)]);
        }
    } else {
        let mut current: Vec<(Mesh, usize)> = vec![(ball_mesh(w0, r0, rings), 1)];
        for _ in 1..=n {
            let mut next = Vec::new();
            for (mesh, deg) in &current {
                let l = lift(map, mesh)?;
                for (child, ld) in l.children.into_iter().zip(l.local_degrees) {
                    next.push((child, deg * ld));
                }
            }
            degrees.push(next.iter().map(|t| t.1).collect());
            current = next;
        }
    }
    let max_per_level: Vec<usize> = degrees.iter().map(|l| l.iter().copied().max().unwrap_or(0)).collect();
    let max = max_per_level.iter().copied().max().unwrap_or(0);
    Ok(DegreeProbe { center: w0, radius: r0, rings, degrees, max_per_level, max })
}

/// Pulls `B(w0, r0)` back `n` times one step at a time and reports the degree
/// of `gⁿ` on every component. Refines the ball mesh on
/// `ResolutionInsufficient` up to `max_rings`.
pub fn degree_probe(
    map: &RationalMap,
    w0: SpherePoint,
    r0: f64,
    n: usize,
    rings: usize,
    max_rings: usize,
) -> Result<DegreeProbe> {
    if (map.degree() as f64).powi(n as i32) > 4096.0 {
        return Err(Error::InvalidParameter(format!("degree {} to the power {n} exceeds 4096", map.degree())));
    }
    if !(r0 > 0.0) || rings == 0 {
        return Err(Error::InvalidParameter("probe radius and ring count must be positive".into()));
    }
    let mut k = rings;
    loop {
        match degree_probe_with(map, w0, r0, n, k) {
            Err(Error::ResolutionInsufficient(_)) if 2 * k <= max_rings => k *= 2,
            other => return other,
        }
    }
}

/// One row: `t = diam f(A)/r` against `diam A / diam A'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub t: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionProbe {
    pub z0: SpherePoint,
    pub w0: SpherePoint,
    pub radius: f64,
    pub local_degree: usize,
    pub rows: Vec<DistortionRow>,
    /// Ratios never decrease with `t`, up to relative noise `1e-9`.
    pub monotone: bool,
    /// Least-squares slope of `ln ratio` against `ln t` over rows with `t > 0`.
    pub exponent: f64,
}

/// `f = g` on the component `W̃` of `g^{-1}(B(g(z0), r))` containing `z0`.
/// `A_k` is the part of `W̃` over the ring disk of index `k`, `A'` the part
/// over index `rings/2 - 1`; all sets contain `z0`.
pub fn distortion_probe(map: &RationalMap, z0: SpherePoint, r: f64, rings: usize) -> Result<DistortionProbe> {
    if rings < 4 || !(r > 0.0) || r >= PI {
        return Err(Error::InvalidParameter("distortion probe needs 0 < r < pi and at least 4 rings".into()));
    }
    let w0 = map.apply(z0);
    let ball = ball_mesh(w0, r, rings);
    let l = lift(map, &ball)?;
    let d = map.degree();
    let (c, _) = (0..d)
        .map(|i| l.table[i])
        .min_by(|a, b| {
            let da = spherical_distance(l.children[a.0 as usize].vertices[a.1 as usize], z0);
            let db = spherical_distance(l.children[b.0 as usize].vertices[b.1 as usize], z0);
            da.total_cmp(&db)
        })
        .unwrap();
    let comp = &l.children[c as usize];
    let ring_index = ring_of(rings);
    let diam_a = |k: usize| diameter_of(&over_ring(comp, &ring_index, k));
    let diam_fa = |k: usize| diameter_of(&over_ring(&ball, &ring_index, k));
    let prime = diam_a(rings / 2 - 1);
    let mut rows = vec![DistortionRow { t: 0.0, ratio: 0.0 }];
    for k in 1..=rings {
        rows.push(DistortionRow { t: diam_fa(k) / r, ratio: diam_a(k) / prime });
    }
    let monotone = rows.windows(2).all(|w| w[1].ratio >= w[0].ratio * (1.0 - 1e-9));
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.t > 0.0 && r.ratio > 0.0).map(|r| (r.t.ln(), r.ratio.ln())).unzip();
    let exponent = ols_slope(&xs, &ys);
    Ok(DistortionProbe { z0, w0, radius: r, local_degree: l.local_degrees[c as usize], rows, monotone, exponent })
}
