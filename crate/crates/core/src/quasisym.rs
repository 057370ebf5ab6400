//! Power quasisymmetry and snowflake fits between two distance matrices on
//! one point set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metric::FiniteMetricSpace;
use crate::report::Verdict;

/// Grid of exponents tried by [`fit_power_quasisymmetry`].
pub fn nu_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

/// `η(t) = K max(t^ν, t^{1/ν})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDistortion {
    #[serde(rename = "K", with = "crate::report::float")]
    pub k: f64,
    pub nu: f64,
}

impl PowerDistortion {
    pub fn eta(&self, t: f64) -> f64 {
        self.k * t.powf(self.nu).max(t.powf(1.0 / self.nu))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionFit {
    pub best: PowerDistortion,
    /// `(ν, K(ν))` for every grid value.
    pub table: Vec<(f64, f64)>,
    /// Triple `(x, y, z)` attaining `K` at the best `ν`.
    pub witness: Option<(usize, usize, usize)>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsFit {
    pub forward: DirectionFit,
    pub backward: DirectionFit,
    pub verdict: Verdict,
}

/// Pair mask: `mask[x*n + y]` false drops the pair from every fit.
pub type PairMask = [bool];

fn usable(mask: Option<&PairMask>, n: usize, x: usize, y: usize) -> bool {
    mask.map_or(true, |m| m[x * n + y])
}

/// For one base point `x`: items `(u, v, y)` with `u = ln d1(x,y)`,
/// `v = ln d2(x,y)`, sorted by `u`.
fn log_rows(d1: &FiniteMetricSpace, d2: &FiniteMetricSpace, mask: Option<&PairMask>, x: usize) -> Vec<(f64, f64, usize)> {
    let n = d1.len();
    let mut items: Vec<(f64, f64, usize)> = (0..n)
        .filter(|&y| y != x && usable(mask, n, x, y))
        .map(|y| (d1.d(x, y).ln(), d2.d(x, y).ln(), y))
        .filter(|t| t.0.is_finite() && t.1.is_finite())
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    items
}

/// Largest `ln(d2(x,y)/d2(x,z)) - ln η_0(d1(x,y)/d1(x,z))` over `y, z`, where
/// `η_0(t) = max(t^ν, t^{1/ν})`.
fn max_excess(items: &[(f64, f64, usize)], nu: f64) -> (f64, Option<(usize, usize)>) {
    let mut best = (f64::NEG_INFINITY, None);
    let take = |v: f64, y: usize, z: usize, best: &mut (f64, Option<(usize, usize)>)| {
        if v > best.0 || (v == best.0 && Some((y, z)) < best.1) {
            *best = (v, Some((y, z)));
        }
    };
    // u_y >= u_z: excess = g_y - g_z with g = v - u/ν
    let mut low: Option<(f64, usize)> = None;
    for &(u, v, y) in items {
        let g = v - u / nu;
        if low.map_or(true, |l| g < l.0) {
            low = Some((g, y));
        }
        let l = low.unwrap();
        take(g - l.0, y, l.1, &mut best);
    }
    // u_y <= u_z: excess = h_y - h_z with h = v - ν u
    let mut low: Option<(f64, usize)> = None;
    for &(u, v, y) in items.iter().rev() {
        let h = v - nu * u;
        if low.map_or(true, |l| h < l.0) {
            low = Some((h, y));
        }
        let l = low.unwrap();
        take(h - l.0, y, l.1, &mut best);
    }
    best
}

/// Relative slack under which two fitted `K` values count as equal.
const K_TIE: f64 = 1e-9;

fn fit_direction(d1: &FiniteMetricSpace, d2: &FiniteMetricSpace, mask: Option<&PairMask>, cap: f64) -> DirectionFit {
    let n = d1.len();
    let grid = nu_grid();
    let rows: Vec<Vec<(f64, f64, usize)>> = (0..n).into_par_iter().map(|x| log_rows(d1, d2, mask, x)).collect();
    let per_nu: Vec<(f64, f64, Option<(usize, usize, usize)>)> = grid
        .par_iter()
        .map(|&nu| {
            let mut best = (f64::NEG_INFINITY, None);
            for (x, items) in rows.iter().enumerate() {
                let (v, k) = max_excess(items, nu);
                if v > best.0 {
                    best = (v, k.map(|(y, z)| (x, y, z)));
                }
            }
            let k = if best.1.is_some() { best.0.exp().max(1.0) } else { 1.0 };
            (nu, k, best.1)
        })
        .collect();
    let least = per_nu.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let pick = per_nu.iter().rposition(|t| t.1 <= least * (1.0 + K_TIE)).unwrap_or(0);
    let (nu, k, witness) = per_nu[pick];
    DirectionFit {
        best: PowerDistortion { k, nu },
        table: per_nu.iter().map(|t| (t.0, t.1)).collect(),
        witness,
        verdict: Verdict::from_bool(k <= cap),
    }
}

/// Smallest `K` on the `ν` grid with `d2(x,y)/d2(x,z) <= η(d1(x,y)/d1(x,z))`
/// for all triples, in both directions. PASS iff both best constants are at
/// most `cap`. Ties in `K` go to the larger `ν`.
pub fn fit_power_quasisymmetry(
    d1: &FiniteMetricSpace,
    d2: &FiniteMetricSpace,
    mask: Option<&PairMask>,
    cap: f64,
) -> QsFit {
    assert_eq!(d1.len(), d2.len(), "distance matrices on different point sets");
    let forward = fit_direction(d1, d2, mask, cap);
    let backward = fit_direction(d2, d1, mask, cap);
    let verdict = forward.verdict.and(backward.verdict);
    QsFit { forward, backward, verdict }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeFit {
    pub alpha: f64,
    /// `exp` of the residual.
    #[serde(rename = "C", with = "crate::report::float")]
    pub c: f64,
    #[serde(with = "crate::report::float")]
    pub residual: f64,
    pub pairs: usize,
    pub verdict: Verdict,
}

/// Fits `α` minimizing `max |ln d2 - α ln d1|` over usable distinct pairs;
/// `C = exp(residual)` and PASS iff `C <= threshold`.
pub fn snowflake_check(
    d1: &FiniteMetricSpace,
    d2: &FiniteMetricSpace,
    mask: Option<&PairMask>,
    threshold: f64,
) -> SnowflakeFit {
    let n = d1.len();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if usable(mask, n, x, y) {
                let (a, b) = (d1.d(x, y).ln(), d2.d(x, y).ln());
                if a.is_finite() && b.is_finite() {
                    pts.push((a, b));
                }
            }
        }
    }
    if pts.is_empty() {
        return SnowflakeFit { alpha: 1.0, c: 1.0, residual: 0.0, pairs: 0, verdict: Verdict::Pass };
    }
    let resid = |alpha: f64| pts.iter().map(|&(a, b)| (b - alpha * a).abs()).fold(0.0, f64::max);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-4, 100.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (resid(c), resid(d));
    for _ in 0..200 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = resid(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = resid(d);
        }
    }
    let alpha = 0.5 * (lo + hi);
    let residual = resid(alpha);
    let cst = residual.exp();
    SnowflakeFit { alpha, c: cst, residual, pairs: pts.len(), verdict: Verdict::from_bool(cst <= threshold) }
}

/// Negative control: row and column `p` scaled by `factor^{m(p,y)}`, a
/// level-dependent distortion that no power quasisymmetry absorbs.
pub fn row_scaled_perturbation(space: &FiniteMetricSpace, levels: &[usize], p: usize, factor: f64) -> FiniteMetricSpace {
    let n = space.len();
    let mut d = space.matrix().to_vec();
    for y in 0..n {
        if y != p {
            let s = factor.powi(levels[y] as i32);
            d[p * n + y] *= s;
            d[y * n + p] *= s;
        }
    }
    FiniteMetricSpace::from_flat_unchecked(n, d)
}
