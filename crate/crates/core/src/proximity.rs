//! The proximity function `m_w`, the combinatorial conditions on it, and the
//! metrics it induces.
//!
//! Values live in a `u8` matrix. The sentinel `N + 1` marks the diagonal and
//! every distinct pair still proximate at the last level `N`; such pairs are
//! "beyond certification". Conditions that need a number for them use the
//! floor `N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverSequence, TileId};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::report::{ConditionRecord, Verdict, VerificationReport, Witness};
use crate::util::{ArgMax, BitSet};
use crate::verify::{verify_visual, Thresholds};

/// Largest supported truncation depth.
pub const MAX_DEPTH: usize = 250;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProximityTable {
    pub n_points: usize,
    pub width: usize,
    pub truncation: usize,
    /// Row-major `n_points × n_points`.
    pub m: Vec<u8>,
}

impl ProximityTable {
    pub fn sentinel(&self) -> usize {
        self.truncation + 1
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.m[x * self.n_points + y] as usize
    }

    pub fn row(&self, x: usize) -> &[u8] {
        &self.m[x * self.n_points..(x + 1) * self.n_points]
    }

    pub fn is_saturated(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == self.sentinel()
    }

    /// `m(x, y)` with distinct saturated pairs lowered to `N`; the diagonal
    /// keeps the sentinel.
    pub fn floor(&self, x: usize, y: usize) -> usize {
        let v = self.get(x, y);
        if x != y && v > self.truncation {
            self.truncation
        } else {
            v
        }
    }

    /// Floored matrix as used by the combinatorial conditions.
    pub fn floored(&self) -> Vec<u8> {
        let n = self.n_points;
        let t = self.truncation as u8;
        let mut f = self.m.clone();
        for x in 0..n {
            for y in 0..n {
                if x != y && f[x * n + y] > t {
                    f[x * n + y] = t;
                }
            }
        }
        f
    }

    /// Distinct pairs `x < y` carrying the sentinel.
    pub fn saturated_pairs(&self) -> usize {
        let n = self.n_points;
        (0..n).map(|x| (x + 1..n).filter(|&y| self.is_saturated(x, y)).count()).sum()
    }

    /// Rows as nested vectors.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.m.chunks(self.n_points.max(1)).map(|r| r.to_vec()).collect()
    }
}

fn check_depth(cover: &CoverSequence) -> Result<()> {
    if cover.depth() > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!("truncation {} exceeds {MAX_DEPTH}", cover.depth())));
    }
    Ok(())
}

/// Per tile of level `n`, the points of the tiles selected by `pick(i, j)`.
fn tile_reach(cover: &CoverSequence, n: usize, pick: impl Fn(&BitSet, usize) -> bool + Sync) -> Vec<BitSet> {
    let prox = cover.proximate_sets(n, cover.width);
    let tiles = cover.level(n);
    let np = cover.n_points();
    (0..tiles.len())
        .into_par_iter()
        .map(|i| {
            let mut b = BitSet::new(np);
            for (j, t) in tiles.iter().enumerate() {
                if pick(&prox[i], j) {
                    for &p in t {
                        b.insert(p);
                    }
                }
            }
            b
        })
        .collect()
}

/// `m_w(x, y)`: the last level `n` with tiles `X ∋ x`, `Y ∋ y` such that
/// `U_w(X) ∩ U_w(Y) ≠ ∅`. Proximity at level `N` gives the sentinel.
pub fn compute_proximity(cover: &CoverSequence) -> Result<ProximityTable> {
    check_depth(cover)?;
    let np = cover.n_points();
    let top = cover.depth();
    let mut m = vec![0u8; np * np];
    for n in 1..=top {
        let reach = tile_reach(cover, n, |prox, j| prox.contains(j));
        let containing = &cover.index().containing[n];
        let value = if n == top { (top + 1) as u8 } else { n as u8 };
        m.par_chunks_mut(np.max(1)).enumerate().for_each(|(x, row)| {
            let mut acc = BitSet::new(np);
            for &t in &containing[x] {
                acc.union_with(&reach[t]);
            }
            for y in acc.iter_ones() {
                row[y] = value;
            }
        });
    }
    if top == 0 {
        m.iter_mut().for_each(|v| *v = 1);
    }
    Ok(ProximityTable { n_points: np, width: cover.width, truncation: top, m })
}

/// Infimum variant `m'_w(x, y)`: the first level with tiles `X ∋ x`, `Y ∋ y`
/// whose neighbourhoods `U_w` are disjoint, or the sentinel if none exists
/// up to `N`. Checks `m'_w <= m_w + 1` against `table`.
pub fn compute_inf_proximity(cover: &CoverSequence, table: &ProximityTable) -> Result<ProximityTable> {
    check_depth(cover)?;
    let np = cover.n_points();
    let top = cover.depth();
    let mut m = vec![(top + 1) as u8; np * np];
    for n in (0..=top).rev() {
        let reach = tile_reach(cover, n, |prox, j| !prox.contains(j));
        let containing = &cover.index().containing[n];
        m.par_chunks_mut(np.max(1)).enumerate().for_each(|(x, row)| {
            let mut acc = BitSet::new(np);
            for &t in &containing[x] {
                acc.union_with(&reach[t]);
            }
            for y in acc.iter_ones() {
                row[y] = n as u8;
            }
        });
    }
    let out = ProximityTable { n_points: np, width: cover.width, truncation: top, m };
    for x in 0..np {
        for y in 0..np {
            assert!(out.get(x, y) <= table.get(x, y) + 1, "m' exceeds m + 1 at ({x}, {y})");
        }
    }
    Ok(out)
}

/// Per-condition constants of the combinatorial conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinatorialCheck {
    pub report: VerificationReport,
    pub saturated: usize,
    pub c_ii: f64,
    pub c_iii: f64,
    pub c_iv: f64,
    /// `max(C_ii, C_iii, C_iv, 0)`.
    pub c_cv: f64,
}

/// Largest `min(m(x,z), m(z,y)) - m(x,y)` over distinct triples, on the
/// floored matrix `f`. Returns the value and the maximizing `(x, y)`.
fn triple_excess(f: &[u8], n: usize) -> (i64, Option<(usize, usize)>) {
    let best = (0..n)
        .into_par_iter()
        .map(|x| {
            let rx = &f[x * n..(x + 1) * n];
            let mut best: (i64, Option<(usize, usize)>) = (i64::MIN, None);
            for y in x + 1..n {
                let ry = &f[y * n..(y + 1) * n];
                let top = rx.iter().zip(ry).map(|(&a, &b)| a.min(b)).max().unwrap_or(0) as i64;
                let v = top - rx[y] as i64;
                if v > best.0 {
                    best = (v, Some((x, y)));
                }
            }
            best
        })
        .reduce(|| (i64::MIN, None), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1 && b.1.is_some()) { b } else { a });
    best
}

fn excess_record(id: &str, desc: &str, v: f64, th: f64, w: Option<Witness>) -> ConditionRecord {
    ConditionRecord::bounded(id, desc, v, th, w)
}

/// Smallest constants for conditions (ii)–(iv) on `m_w`, with condition (i)
/// reporting the number of saturated pairs. PASS iff `C_cv <= th.additive`.
pub fn check_combinatorially_visual(cover: &CoverSequence, table: &ProximityTable, th: &Thresholds) -> CombinatorialCheck {
    let np = table.n_points;
    let f = table.floored();
    let top = cover.depth();
    let saturated = table.saturated_pairs();
    let mut r = VerificationReport::new("combinatorially_visual", top, cover.width, cover.lambda);
    r.conditions.push(ConditionRecord {
        id: "i".into(),
        description: format!("{saturated} distinct pairs are proximate at the last level and floored to {top}"),
        constant: saturated as f64,
        threshold: None,
        verdict: Verdict::Pass,
        witness: None,
        per_level: Vec::new(),
    });

    // (ii)
    let mut c_ii = ArgMax::<(usize, usize)>::new();
    for n in 0..=top {
        for (i, t) in cover.level(n).iter().enumerate() {
            let mut low = f64::INFINITY;
            for (a, &x) in t.iter().enumerate() {
                for &y in &t[a + 1..] {
                    low = low.min(f[x * np + y] as f64);
                }
            }
            c_ii.offer(low - n as f64, (n, i));
        }
    }
    let v_ii = c_ii.value;
    r.conditions.push(excess_record(
        "ii",
        "every tile of level n contains x, y with m(x,y) <= n + C",
        v_ii,
        th.additive,
        c_ii.key.map(|(n, i)| Witness::tiles(vec![TileId::new(n, i)], v_ii)),
    ));

    // (iii)
    let mut c_iii = ArgMax::<(usize, usize, usize)>::new();
    for n in 1..=top {
        let prox = cover.proximate_sets(n, cover.width);
        let tiles = cover.level(n);
        let best = (0..tiles.len())
            .into_par_iter()
            .map(|i| {
                let mut b = ArgMax::new();
                for j in i + 1..tiles.len() {
                    if prox[i].contains(j) {
                        continue;
                    }
                    let mut hi = 0u8;
                    for &x in &tiles[i] {
                        for &y in &tiles[j] {
                            hi = hi.max(f[x * np + y]);
                        }
                    }
                    b.offer(hi as f64 - n as f64, (n, i, j));
                }
                b
            })
            .reduce(ArgMax::new, ArgMax::merge);
        c_iii = c_iii.merge(best);
    }
    let v_iii = if c_iii.key.is_some() { c_iii.value } else { f64::NEG_INFINITY };
    r.conditions.push(excess_record(
        "iii",
        "U_w-separated tiles of level n have m(x,y) <= n + C across",
        v_iii.max(0.0),
        th.additive,
        c_iii.key.map(|k| Witness::tiles(vec![TileId::new(k.0, k.1), TileId::new(k.0, k.2)], v_iii)),
    ));

    // (iv)
    let (v, key) = triple_excess(&f, np);
    let v_iv = if key.is_some() { v as f64 } else { f64::NEG_INFINITY };
    let wit = key.map(|(x, y)| {
        let z = (0..np)
            .max_by_key(|&z| (f[x * np + z].min(f[y * np + z]), std::cmp::Reverse(z)))
            .unwrap();
        Witness::points(vec![x, y, z], v_iv)
    });
    r.conditions.push(excess_record(
        "iv",
        "m(x,y) >= min(m(x,z), m(z,y)) - C",
        v_iv.max(0.0),
        th.additive,
        wit,
    ));

    let c_cv = v_ii.max(v_iii).max(v_iv).max(0.0);
    r.derived.insert("C_cv".into(), c_cv);
    r.derived.insert("saturated_pairs".into(), saturated as f64);
    r.notes.push("the constant of condition (i) counts saturated pairs; it cannot fail at finite depth".into());
    let mut report = r.finish();
    if c_cv > th.additive {
        report.verdict = Verdict::Fail;
    }
    CombinatorialCheck { report, saturated, c_ii: v_ii, c_iii: v_iii.max(0.0), c_iv: v_iv.max(0.0), c_cv }
}

/// `q(x, y) = Λ^{-m(x,y)}` with floored values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiMetric {
    pub n: usize,
    pub q: Vec<f64>,
    /// Guaranteed constant `Λ^{C_cv}`.
    pub k: f64,
    /// Smallest constant valid over all triples.
    pub k_measured: f64,
    pub lambda: f64,
}

impl QuasiMetric {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.q[x * self.n + y]
    }
}

/// Builds `q = Λ^{-m}` and checks `q(x,y) <= K max(q(x,z), q(z,y))` over all
/// triples with `K = Λ^{C_cv}`.
pub fn quasi_metric_from_m(table: &ProximityTable, lambda: f64, c_cv: f64) -> Result<QuasiMetric> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {lambda}")));
    }
    let k = lambda.powf(c_cv);
    if k > 2.0 * (1.0 + 1e-12) {
        return Err(Error::LambdaTooLarge { k });
    }
    let k = k.min(2.0);
    let n = table.n_points;
    let f = table.floored();
    let q: Vec<f64> = (0..n * n)
        .map(|i| if i / n == i % n { 0.0 } else { lambda.powi(-(f[i] as i32)) })
        .collect();
    let (excess, key) = triple_excess(&f, n);
    let k_measured = if key.is_some() { lambda.powi(excess.max(0) as i32) } else { 1.0 };
    assert!(k_measured <= k * (1.0 + 1e-12), "quasi-metric constant {k_measured} exceeds {k}");
    Ok(QuasiMetric { n, q, k, k_measured, lambda })
}

/// Sandwich constants of a chain metrization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub k: f64,
    /// Smallest `d/q` over distinct pairs; at least `1/(2K)`.
    pub min_ratio: f64,
    /// Largest `d/q` over distinct pairs; at most 1.
    pub max_ratio: f64,
    pub holds: bool,
}

/// Shortest-chain metric `d(x,y) = min Σ q(z_i, z_{i+1})`, checked against
/// `q/(2K) <= d <= q`.
pub fn chain_metrize(qm: &QuasiMetric) -> Result<(FiniteMetricSpace, Sandwich)> {
    if qm.k > 2.0 {
        return Err(Error::KTooLarge(qm.k));
    }
    let n = qm.n;
    let mut d = qm.q.clone();
    let mut pivot = vec![0.0; n];
    for k in 0..n {
        pivot.copy_from_slice(&d[k * n..(k + 1) * n]);
        d.par_chunks_mut(n).for_each(|row| {
            let dik = row[k];
            for (v, &p) in row.iter_mut().zip(&pivot) {
                let c = dik + p;
                if c < *v {
                    *v = c;
                }
            }
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                let r = d[x * n + y] / qm.q[x * n + y];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    if n < 2 {
        lo = 1.0;
        hi = 1.0;
    }
    let holds = hi <= 1.0 && lo >= 1.0 / (2.0 * qm.k) * (1.0 - 1e-12);
    let space = FiniteMetricSpace::from_flat_unchecked(n, d);
    space.validate()?;
    Ok((space, Sandwich { k: qm.k, min_ratio: lo, max_ratio: hi, holds }))
}

/// Proximity, quasi-metric and chain metric, then the visual check of the
/// result against `cover` with parameter `Λ`.
pub fn synthesize_visual_metric(
    cover: &CoverSequence,
    lambda: f64,
    th: &Thresholds,
) -> Result<(FiniteMetricSpace, VerificationReport)> {
    let table = compute_proximity(cover)?;
    let cv = check_combinatorially_visual(cover, &table, th);
    if !cv.report.passed() {
        return Err(Error::InvalidCover(format!("cover is not combinatorially visual (C = {})", cv.c_cv)));
    }
    let qm = quasi_metric_from_m(&table, lambda, cv.c_cv)?;
    let (d, sandwich) = chain_metrize(&qm)?;
    let mut report = verify_visual(&d, &cover.with_lambda(Some(lambda)), th)?;
    report.kind = "synthesized_visual".into();
    report.derived.insert("C_cv".into(), cv.c_cv);
    report.derived.insert("K".into(), qm.k);
    report.derived.insert("K_measured".into(), qm.k_measured);
    report.derived.insert("sandwich_min".into(), sandwich.min_ratio);
    report.derived.insert("sandwich_max".into(), sandwich.max_ratio);
    report.conditions.push(ConditionRecord {
        id: "sandwich".into(),
        description: "q/(2K) <= d <= q".into(),
        constant: sandwich.min_ratio,
        threshold: Some(1.0 / (2.0 * qm.k)),
        verdict: Verdict::from_bool(sandwich.holds),
        witness: None,
        per_level: Vec::new(),
    });
    Ok((d, report.finish()))
}

/// Best constant `C` with `d(x,y)/C <= Λ^{-m(x,y)} <= C d(x,y)` over distinct
/// pairs that are not saturated.
pub fn visual_characterization_check(
    space: &FiniteMetricSpace,
    cover: &CoverSequence,
    lambda: f64,
    th: &Thresholds,
) -> Result<VerificationReport> {
    let table = compute_proximity(cover)?;
    let n = space.len();
    let best = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut b = ArgMax::<(usize, usize)>::new();
            for y in x + 1..n {
                if table.is_saturated(x, y) {
                    continue;
                }
                let s = lambda.powi(-(table.get(x, y) as i32));
                let d = space.d(x, y);
                b.offer((d / s).max(s / d), (x, y));
            }
            b
        })
        .reduce(ArgMax::new, ArgMax::merge);
    let v = if best.key.is_some() { best.value } else { 1.0 };
    let mut r = VerificationReport::new("visual_characterization", cover.depth(), cover.width, Some(lambda));
    r.conditions.push(ConditionRecord::bounded(
        "vc",
        "d(x,y) comparable to lambda^-m(x,y)",
        v,
        th.comparability,
        best.key.map(|(x, y)| Witness::points(vec![x, y], v)),
    ));
    r.derived.insert("saturated_pairs".into(), table.saturated_pairs() as f64);
    Ok(r.finish())
}
