//! Empirical verification of the visual and quasi-visual conditions.
//!
//! Every "comparable up to a constant" statement becomes the best constant
//! over the truncated cover, compared against a user threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverSequence, TileId};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::report::{ConditionRecord, LevelRecord, Verdict, VerificationReport, Witness};
use crate::util::{ols_slope, ratio, ArgMax};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Multiplicative comparability constants (`≍`).
    pub comparability: f64,
    /// Separation constants (`≳`).
    pub separation: f64,
    /// Required contraction factor in the shrinking condition.
    pub shrink: f64,
    /// Additive constants of the combinatorial conditions, in levels.
    pub additive: f64,
    /// Cap on the distortion constant of power quasisymmetries.
    pub qs_cap: f64,
    /// Largest accepted snowflake constant.
    pub snowflake: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { comparability: 64.0, separation: 64.0, shrink: 0.95, additive: 8.0, qs_cap: 1e6, snowflake: 64.0 }
    }
}

impl Thresholds {
    /// Same threshold for both multiplicative constants.
    pub fn uniform(c: f64) -> Self {
        Thresholds { comparability: c, separation: c, ..Default::default() }
    }
}

const FINITE_NOTE: &str = "covers are finite families truncated at the stated depth";

type PairKey = (usize, usize, usize);

fn witness2(level_a: usize, a: usize, level_b: usize, b: usize, r: f64) -> Witness {
    Witness::tiles(vec![TileId::new(level_a, a), TileId::new(level_b, b)], r)
}

/// Visual conditions with parameter `Λ = cover.lambda`:
/// `C1` bounds `diam(X) ≍ Λ^{-n}` and `C2` bounds `dist(X,Y) ≳ Λ^{-n}` for
/// tiles whose `U_w` neighbourhoods are disjoint.
pub fn verify_visual(space: &FiniteMetricSpace, cover: &CoverSequence, th: &Thresholds) -> Result<VerificationReport> {
    let lambda = cover.lambda.ok_or_else(|| Error::InvalidParameter("visual check needs lambda".into()))?;
    let n_max = cover.depth();
    let diams = cover.diameters(space);
    let mut c1 = ArgMax::<(usize, usize)>::new();
    for (n, ds) in diams.iter().enumerate() {
        let s = lambda.powi(-(n as i32));
        for (i, &d) in ds.iter().enumerate() {
            c1.offer(ratio(d, s).max(ratio(s, d)), (n, i));
        }
    }
    let mut c2 = ArgMax::<PairKey>::new();
    let mut per_level = Vec::new();
    for n in 1..=n_max {
        let s = lambda.powi(-(n as i32));
        let best = separated_pairs_max(space, cover, n, |_, _, dist| ratio(s, dist));
        per_level.push(level_record(n, &best, |k| witness2(n, k.1, n, k.2, best.value)));
        if let Some(k) = best.key {
            c2.offer(best.value, k);
        }
    }
    let c2v = if c2.key.is_some() { c2.value } else { 0.0 };
    let mut r = VerificationReport::new("visual", n_max, cover.width, Some(lambda));
    let (n, i) = c1.key.unwrap();
    r.conditions.push(ConditionRecord::bounded(
        "C1",
        "diam(X) comparable to lambda^-n",
        c1.value,
        th.comparability,
        Some(Witness::tiles(vec![TileId::new(n, i)], c1.value)),
    ));
    let mut rec = ConditionRecord::bounded(
        "C2",
        "dist(X,Y) >= lambda^-n / C for U_w-separated tiles",
        c2v,
        th.separation,
        c2.key.map(|k| witness2(k.0, k.1, k.0, k.2, c2v)),
    );
    rec.per_level = per_level;
    r.conditions.push(rec);
    r.notes.push(FINITE_NOTE.into());
    Ok(r.finish())
}

fn level_record(n: usize, best: &ArgMax<PairKey>, w: impl Fn(&PairKey) -> Witness) -> LevelRecord {
    LevelRecord {
        level: n,
        constant: if best.key.is_some() { best.value } else { 0.0 },
        witness: best.key.as_ref().map(w),
    }
}

/// Maximum of `f(i, j, dist(X_i, X_j))` over unordered pairs of level-`n`
/// tiles with disjoint `U_w` neighbourhoods.
fn separated_pairs_max(
    space: &FiniteMetricSpace,
    cover: &CoverSequence,
    n: usize,
    f: impl Fn(usize, usize, f64) -> f64 + Sync,
) -> ArgMax<PairKey> {
    let prox = cover.proximate_sets(n, cover.width);
    let tiles = cover.level(n);
    (0..tiles.len())
        .into_par_iter()
        .map(|i| {
            let mut best = ArgMax::new();
            for j in i + 1..tiles.len() {
                if !prox[i].contains(j) {
                    let dist = space.set_dist(&tiles[i], &tiles[j]);
                    best.offer(f(i, j, dist), (n, i, j));
                }
            }
            best
        })
        .reduce(ArgMax::new, ArgMax::merge)
}

/// Quasi-visual conditions (i)–(iv):
/// (i) intersecting tiles of one level have comparable diameters;
/// (ii) `U_w`-separated tiles of one level are at distance `≳` their diameters;
/// (iii) intersecting tiles of consecutive levels have comparable diameters;
/// (iv) some gap `k0` shrinks diameters by a factor `λ <= th.shrink`.
pub fn verify_quasi_visual(
    space: &FiniteMetricSpace,
    cover: &CoverSequence,
    th: &Thresholds,
) -> Result<VerificationReport> {
    let n_max = cover.depth();
    let diams = cover.diameters(space);
    let mut r = VerificationReport::new("quasi_visual", n_max, cover.width, cover.lambda);

    // (i)
    let mut c_i = ArgMax::<PairKey>::new();
    for n in 0..=n_max {
        for (i, adj) in cover.index().adjacent[n].iter().enumerate() {
            for &j in adj.iter().filter(|&&j| j > i) {
                let (a, b) = (diams[n][i], diams[n][j]);
                c_i.offer(ratio(a, b).max(ratio(b, a)), (n, i, j));
            }
        }
    }
    let v = if c_i.key.is_some() { c_i.value } else { 1.0 };
    r.conditions.push(ConditionRecord::bounded(
        "i",
        "intersecting tiles of one level have comparable diameters",
        v,
        th.comparability,
        c_i.key.map(|k| witness2(k.0, k.1, k.0, k.2, v)),
    ));

    // (ii)
    let mut c_ii = ArgMax::<PairKey>::new();
    let mut per_level = Vec::new();
    for n in 1..=n_max {
        let d = &diams[n];
        let best = separated_pairs_max(space, cover, n, |i, j, dist| ratio(d[i].max(d[j]), dist));
        per_level.push(level_record(n, &best, |k| witness2(n, k.1, n, k.2, best.value)));
        if let Some(k) = best.key {
            c_ii.offer(best.value, k);
        }
    }
    let v = if c_ii.key.is_some() { c_ii.value } else { 0.0 };
    let mut rec = ConditionRecord::bounded(
        "ii",
        "U_w-separated tiles are at distance comparable to their diameters",
        v,
        th.separation,
        c_ii.key.map(|k| witness2(k.0, k.1, k.0, k.2, v)),
    );
    rec.per_level = per_level;
    r.conditions.push(rec);

    // (iii)
    let mut c_iii = ArgMax::<PairKey>::new();
    let mut per_level = Vec::new();
    for n in 0..n_max {
        let mut best = ArgMax::<PairKey>::new();
        for (i, j) in cover.meeting_pairs(n, n + 1) {
            let (a, b) = (diams[n][i], diams[n + 1][j]);
            best.offer(ratio(a, b).max(ratio(b, a)), (n, i, j));
        }
        per_level.push(level_record(n, &best, |k| witness2(n, k.1, n + 1, k.2, best.value)));
        if let Some(k) = best.key {
            c_iii.offer(best.value, k);
        }
    }
    let v = if c_iii.key.is_some() { c_iii.value } else { 1.0 };
    let mut rec = ConditionRecord::bounded(
        "iii",
        "intersecting tiles of consecutive levels have comparable diameters",
        v,
        th.comparability,
        c_iii.key.map(|k| witness2(k.0, k.1, k.0 + 1, k.2, v)),
    );
    rec.per_level = per_level;
    r.conditions.push(rec);

    // (iv)
    let k_hi = n_max.saturating_sub(1).max(1).min(n_max);
    let mut found: Option<(usize, ArgMax<PairKey>)> = None;
    let mut first: Option<(usize, ArgMax<PairKey>)> = None;
    for k0 in 1..=k_hi {
        let best = shrink_factor(cover, &diams, k0);
        if first.is_none() {
            first = Some((k0, best.clone()));
        }
        if best.key.is_some() && best.value <= th.shrink {
            found = Some((k0, best));
            break;
        }
    }
    let rec = match (found, first) {
        (Some((k0, best)), _) => {
            r.derived.insert("k0".into(), k0 as f64);
            r.derived.insert("lambda_iv".into(), best.value);
            let k = best.key.unwrap();
            ConditionRecord {
                id: "iv".into(),
                description: format!("diameters shrink by lambda <= {} across {} levels", th.shrink, k0),
                constant: best.value,
                threshold: Some(th.shrink),
                verdict: Verdict::Pass,
                witness: Some(witness2(k.0, k.1, k.0 + k0, k.2, best.value)),
                per_level: Vec::new(),
            }
        }
        (None, first) => {
            let (k0, best) = first.unwrap_or((1, ArgMax::new()));
            let v = if best.key.is_some() { best.value } else { f64::INFINITY };
            ConditionRecord {
                id: "iv".into(),
                description: format!("no gap k0 <= {k_hi} shrinks diameters by {}", th.shrink),
                constant: v,
                threshold: Some(th.shrink),
                verdict: Verdict::Fail,
                witness: best.key.map(|k| witness2(k.0, k.1, k.0 + k0, k.2, v)),
                per_level: Vec::new(),
            }
        }
    };
    r.conditions.push(rec);
    r.notes.push(FINITE_NOTE.into());
    Ok(r.finish())
}

/// Largest `diam(Y)/diam(X)` over intersecting `X ∈ X^n`, `Y ∈ X^{n+k}`.
fn shrink_factor(cover: &CoverSequence, diams: &[Vec<f64>], k: usize) -> ArgMax<PairKey> {
    let mut best = ArgMax::new();
    for n in 0..=cover.depth().saturating_sub(k) {
        if n + k > cover.depth() {
            break;
        }
        for (i, j) in cover.meeting_pairs(n, n + k) {
            best.offer(ratio(diams[n + k][j], diams[n][i]), (n, i, j));
        }
    }
    best
}

/// Exponential rates of diameter decay across levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rho: f64,
    pub tau: f64,
    /// `log ρ / log τ`, clipped to `(0, 1]`.
    pub nu: f64,
    pub nu_raw: f64,
    /// Smallest `C >= 1` with `r_max(k) <= C ρ^k` for all fitted gaps.
    pub c_upper: f64,
    /// Largest `c <= 1` with `r_min(k) >= c τ^k` for all fitted gaps.
    pub c_lower: f64,
    /// Per gap `k`: `(k, r_max(k), r_min(k))`.
    pub gaps: Vec<(usize, f64, f64)>,
}

/// Fits `ρ` and `τ` with `diam(Y) <= C ρ^k diam(X)` and `diam(Y) >= c τ^k
/// diam(X)` for intersecting `X ∈ X^n`, `Y ∈ X^{n+k}`, `n >= 1`.
///
/// For each gap `k` the extreme ratios `r_max(k)` and `r_min(k)` are taken
/// over all such pairs; `ρ` and `τ` are the exponentials of the
/// least-squares slopes of `log r_max` and `log r_min` against `k`. The
/// base level is left out because `X^0` is not part of the geometric
/// progression.
pub fn derive_rho_tau_nu(space: &FiniteMetricSpace, cover: &CoverSequence) -> Result<RateFit> {
    derive_rho_tau_nu_padded(space, cover, 0.0)
}

/// As [`derive_rho_tau_nu`] with every tile diameter increased by `pad`.
/// For a sample of a continuum with mesh `h`, `pad = h` measures the union of
/// the Voronoi cells of a tile instead of the tile itself.
pub fn derive_rho_tau_nu_padded(space: &FiniteMetricSpace, cover: &CoverSequence, pad: f64) -> Result<RateFit> {
    let n_max = cover.depth();
    if n_max < 2 {
        return Err(Error::FitFailure("need at least two levels beyond the base".into()));
    }
    let mut diams = cover.diameters(space);
    if pad > 0.0 {
        for d in diams.iter_mut().flatten() {
            *d += pad;
        }
    }
    let mut gaps = Vec::new();
    for k in 1..n_max {
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        for n in 1..=n_max - k {
            for (i, j) in cover.meeting_pairs(n, n + k) {
                let (a, b) = (diams[n][i], diams[n + k][j]);
                if a > 0.0 && b > 0.0 {
                    hi = hi.max(b / a);
                    lo = lo.min(b / a);
                }
            }
        }
        if hi > 0.0 {
            gaps.push((k, hi, lo));
        }
    }
    if gaps.is_empty() {
        return Err(Error::FitFailure("no intersecting cross-level pairs with positive diameters".into()));
    }
    let ks: Vec<f64> = gaps.iter().map(|g| g.0 as f64).collect();
    let rho = ols_slope(&ks, &gaps.iter().map(|g| g.1.ln()).collect::<Vec<_>>()).exp();
    let tau = ols_slope(&ks, &gaps.iter().map(|g| g.2.ln()).collect::<Vec<_>>()).exp();
    if !(rho < 1.0) {
        return Err(Error::FitFailure(format!("diameters do not shrink (rho = {rho})")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::FitFailure(format!("lower rate out of range (tau = {tau})")));
    }
    let c_upper = gaps.iter().map(|g| g.1 / rho.powi(g.0 as i32)).fold(1.0, f64::max);
    let c_lower = gaps.iter().map(|g| g.2 / tau.powi(g.0 as i32)).fold(1.0, f64::min);
    let nu_raw = rho.ln() / tau.ln();
    Ok(RateFit { rho, tau, nu: nu_raw.clamp(f64::MIN_POSITIVE, 1.0), nu_raw, c_upper, c_lower, gaps })
}

/// Constants of the inclusions `B(x, r0 diam X) ⊂ U_{2w+1}(X) ⊂ B(x, R0 diam X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiBall {
    pub r0: f64,
    #[serde(rename = "R0")]
    pub big_r0: f64,
    pub r0_witness: Option<(TileId, usize)>,
    pub big_r0_witness: Option<(TileId, usize)>,
}

/// Largest `r0` and smallest `R0` over all tiles `X` and points `x ∈ X`.
/// Pairs with `U_{2w+1}(X) = S` constrain only `R0`; if every pair is of
/// that kind `r0 = R0`.
pub fn quasiball_check(space: &FiniteMetricSpace, cover: &CoverSequence) -> QuasiBall {
    let reach = 2 * cover.width + 1;
    let n = space.len();
    let mut inner: Option<(f64, (TileId, usize))> = None;
    let mut outer = ArgMax::<(TileId, usize)>::new();
    for level in 0..=cover.depth() {
        let results: Vec<(ArgMax<(TileId, usize)>, Option<(f64, (TileId, usize))>)> = (0..cover.level(level).len())
            .into_par_iter()
            .map(|i| {
                let id = TileId::new(level, i);
                let tile = cover.tile(id);
                let diam = space.set_diam(tile);
                let u = cover.u_w_points(id, reach).unwrap();
                let mut in_u = vec![false; n];
                for &p in &u {
                    in_u[p] = true;
                }
                let mut out = ArgMax::new();
                let mut inn: Option<(f64, (TileId, usize))> = None;
                for &x in tile {
                    let row = space.row(x);
                    let far = u.iter().map(|&p| row[p]).fold(0.0, f64::max);
                    out.offer(ratio(far, diam), (id, x));
                    let near = (0..n).filter(|&p| !in_u[p]).map(|p| row[p]).fold(f64::INFINITY, f64::min);
                    if near.is_finite() {
                        let v = ratio(near, diam);
                        if inn.as_ref().map_or(true, |b| v < b.0) {
                            inn = Some((v, (id, x)));
                        }
                    }
                }
                (out, inn)
            })
            .collect();
        for (o, inn) in results {
            outer = outer.merge(o);
            if let Some(c) = inn {
                if inner.as_ref().map_or(true, |b| c.0 < b.0 || (c.0 == b.0 && c.1 < b.1)) {
                    inner = Some(c);
                }
            }
        }
    }
    let big_r0 = outer.value;
    match inner {
        Some((r0, w)) => QuasiBall { r0, big_r0, r0_witness: Some(w), big_r0_witness: outer.key },
        None => QuasiBall { r0: big_r0, big_r0, r0_witness: None, big_r0_witness: outer.key },
    }
}

/// Best constant `C(R)` with `diam(X) ≍ diam(Y)` whenever `X, Y` are tiles
/// of one level and `Y` meets `B(x, R diam X)` for some `x ∈ X`. The ball
/// always contains its center.
pub fn ball_tile_comparability(
    space: &FiniteMetricSpace,
    cover: &CoverSequence,
    big_r: f64,
) -> (f64, Option<Witness>) {
    let diams = cover.diameters(space);
    let idx = cover.index();
    let mut best = ArgMax::<PairKey>::new();
    for level in 0..=cover.depth() {
        let d = &diams[level];
        let b = (0..cover.level(level).len())
            .into_par_iter()
            .map(|i| {
                let mut best = ArgMax::new();
                let rad = big_r * d[i];
                for &x in &cover.level(level)[i] {
                    let row = space.row(x);
                    for p in 0..space.len() {
                        if p == x || row[p] < rad {
                            for &j in &idx.containing[level][p] {
                                best.offer(ratio(d[i], d[j]).max(ratio(d[j], d[i])), (level, i, j));
                            }
                        }
                    }
                }
                best
            })
            .reduce(ArgMax::new, ArgMax::merge);
        best = best.merge(b);
    }
    let v = if best.key.is_some() { best.value } else { 1.0 };
    (v, best.key.map(|k| witness2(k.0, k.1, k.0, k.2, v)))
}
