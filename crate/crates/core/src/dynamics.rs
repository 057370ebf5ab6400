//! Checks for covers that a self-map shifts by one level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverSequence, TileId};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::proximity::{compute_proximity, ProximityTable};
use crate::report::{ConditionRecord, Verdict, VerificationReport, Witness};
use crate::util::ArgMax;
use crate::verify::{derive_rho_tau_nu, Thresholds};

/// Largest number of centres `z0` tried per tile in the distortion check.
pub const DISTORTION_CENTERS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicalOptions {
    /// Require `g(X^{n+1})` to equal a tile of level `n`, not only to lie in one.
    pub exact_image: bool,
    /// Ball radius factor `R` of the distortion check.
    pub radius: f64,
    /// Exponent for the distortion check; fitted from the cover when absent.
    pub nu: Option<f64>,
}

impl Default for DynamicalOptions {
    fn default() -> Self {
        DynamicalOptions { exact_image: false, radius: 1.0, nu: None }
    }
}

fn check_map(map: &[usize], n: usize) -> Result<()> {
    if map.len() != n {
        return Err(Error::InvalidParameter(format!("map has {} entries for {n} points", map.len())));
    }
    if let Some((p, &q)) = map.iter().enumerate().find(|(_, &q)| q >= n) {
        return Err(Error::MapNotClosed { point: p, image: q });
    }
    Ok(())
}

/// `iterates[k][x] = g^k(x)` for `k = 0..=count`.
pub fn iterates(map: &[usize], count: usize) -> Vec<Vec<usize>> {
    let mut out = vec![(0..map.len()).collect::<Vec<_>>()];
    for k in 0..count {
        let next = out[k].iter().map(|&x| map[x]).collect();
        out.push(next);
    }
    out
}

/// Tile shift `g(X^{n+1}) ⊂ X^n` for some `X^n`, equality in exact mode (levels
/// `n >= 1` only, as `X^0` carries no dynamical constraint). Returns the
/// number of offending tiles and the first one.
fn tile_shift(cover: &CoverSequence, map: &[usize], exact: bool) -> (usize, Option<TileId>) {
    let idx = cover.index();
    let mut bad = 0;
    let mut first = None;
    for n in 0..cover.depth() {
        for (i, t) in cover.level(n + 1).iter().enumerate() {
            let mut img: Vec<usize> = t.iter().map(|&p| map[p]).collect();
            img.sort_unstable();
            img.dedup();
            let mut cands: Vec<usize> = idx.containing[n][img[0]].clone();
            for &p in &img[1..] {
                cands.retain(|c| idx.containing[n][p].contains(c));
            }
            let ok = if exact && n >= 1 {
                cands.iter().any(|&c| cover.level(n)[c] == img[..])
            } else {
                !cands.is_empty()
            };
            if !ok {
                bad += 1;
                first.get_or_insert(TileId::new(n + 1, i));
            }
        }
    }
    (bad, first)
}

/// Largest `m(x,y) - k - m(g^k x, g^k y)` over distinct pairs and
/// `k = 1..=N`, on floored values; non-positive when the inequality holds.
fn proximity_decay(table: &ProximityTable, its: &[Vec<usize>]) -> (i64, Option<(usize, usize, usize)>) {
    let n = table.n_points;
    (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best: (i64, Option<(usize, usize, usize)>) = (i64::MIN, None);
            for y in x + 1..n {
                let m = table.floor(x, y) as i64;
                for (k, g) in its.iter().enumerate().skip(1) {
                    let v = m - k as i64 - table.floor(g[x], g[y]) as i64;
                    if v > best.0 {
                        best = (v, Some((x, y, k)));
                    }
                }
            }
            best
        })
        .reduce(|| (i64::MIN, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1.is_some() && b.1 < a.1) { b } else { a })
}

/// Evenly spaced members of a tile used as centres.
fn centers(tile: &[usize]) -> Vec<usize> {
    let k = tile.len().min(DISTORTION_CENTERS);
    let mut c: Vec<usize> = (0..k).map(|i| tile[i * tile.len() / k]).collect();
    c.dedup();
    c
}

/// Best `C` in `d(g^k x, g^k y) <= C (d(x,y)/diam Z)^ν` over `k >= 1`, tiles
/// `Z` of level `k + 1`, centres `z0 ∈ Z` and `x, y ∈ B(z0, R diam Z)`.
fn distortion(
    space: &FiniteMetricSpace,
    cover: &CoverSequence,
    its: &[Vec<usize>],
    nu: f64,
    radius: f64,
) -> ArgMax<(usize, usize, usize)> {
    let diams = cover.diameters(space);
    let mut best = ArgMax::new();
    for k in 1..cover.depth() {
        let g = &its[k];
        let b = (0..cover.level(k + 1).len())
            .into_par_iter()
            .map(|i| {
                let mut best = ArgMax::new();
                let dz = diams[k + 1][i];
                if dz == 0.0 {
                    return best;
                }
                for z0 in centers(&cover.level(k + 1)[i]) {
                    let row = space.row(z0);
                    let ball: Vec<usize> = (0..space.len()).filter(|&p| row[p] <= radius * dz).collect();
                    for (a, &x) in ball.iter().enumerate() {
                        for &y in &ball[a + 1..] {
                            let img = space.d(g[x], g[y]);
                            if img == 0.0 {
                                continue;
                            }
                            let v = img / (space.d(x, y) / dz).powf(nu);
                            best.offer(v, (k, x, y));
                        }
                    }
                }
                best
            })
            .reduce(ArgMax::new, ArgMax::merge);
        best = best.merge(b);
    }
    best
}

/// (a) tile shift, (b) proximity decay `m(g^k x, g^k y) >= m(x,y) - k`, and
/// (c) the distortion bound with exponent `ν`.
pub fn dynamical_checks(
    space: &FiniteMetricSpace,
    cover: &CoverSequence,
    map: &[usize],
    opts: &DynamicalOptions,
    th: &Thresholds,
) -> Result<VerificationReport> {
    check_map(map, cover.n_points())?;
    let top = cover.depth();
    let its = iterates(map, top);
    let mut r = VerificationReport::new("dynamical", top, cover.width, cover.lambda);

    let (bad, first) = tile_shift(cover, map, opts.exact_image);
    r.conditions.push(ConditionRecord {
        id: "a".into(),
        description: if opts.exact_image {
            "g maps each tile of level n+1 onto a tile of level n".into()
        } else {
            "g maps each tile of level n+1 into a tile of level n".into()
        },
        constant: bad as f64,
        threshold: Some(0.0),
        verdict: Verdict::from_bool(bad == 0),
        witness: first.map(|t| Witness::tiles(vec![t], bad as f64)),
        per_level: Vec::new(),
    });

    let table = compute_proximity(cover)?;
    let (v, key) = proximity_decay(&table, &its);
    let v = if key.is_some() { v as f64 } else { 0.0 };
    r.conditions.push(ConditionRecord {
        id: "b".into(),
        description: "m(g^k x, g^k y) >= m(x,y) - k".into(),
        constant: v.max(0.0),
        threshold: Some(0.0),
        verdict: Verdict::from_bool(v <= 0.0),
        witness: key.filter(|_| v > 0.0).map(|(x, y, k)| Witness::points(vec![x, y, k], v)),
        per_level: Vec::new(),
    });

    let nu = match opts.nu {
        Some(nu) => Some(nu),
        None => match derive_rho_tau_nu(space, cover) {
            Ok(fit) => {
                r.derived.insert("rho".into(), fit.rho);
                r.derived.insert("tau".into(), fit.tau);
                Some(fit.nu)
            }
            Err(e) => {
                r.notes.push(format!("distortion check skipped: {e}"));
                None
            }
        },
    };
    if let Some(nu) = nu {
        r.derived.insert("nu".into(), nu);
        let best = distortion(space, cover, &its, nu, opts.radius);
        let c = if best.key.is_some() { best.value.max(1.0) } else { 1.0 };
        r.conditions.push(ConditionRecord::bounded(
            "c",
            "d(g^k x, g^k y) <= C (d(x,y)/diam Z)^nu near tiles Z of level k+1",
            c,
            th.comparability,
            best.key.map(|(k, x, y)| Witness::points(vec![x, y, k], c)),
        ));
    }
    Ok(r.finish())
}
