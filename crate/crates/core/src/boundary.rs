//! Level-`N` approximation of the boundary at infinity of the tile graph:
//! natural geodesics of points and the visual metric `Λ^{-(X·Y)}` between
//! their last tiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{CoverSequence, TileId};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::quasisym::{fit_power_quasisymmetry, snowflake_check, QsFit, SnowflakeFit};
use crate::report::Verdict;
use crate::tilegraph::TileGraph;
use crate::util::ArgMax;
use crate::verify::Thresholds;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    #[default]
    Lowest,
    Highest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaturalGeodesic {
    pub point: usize,
    /// Tile index per level.
    pub tiles: Vec<usize>,
    /// Levels at which more than one tile contains the point.
    pub ambiguous_levels: Vec<usize>,
}

impl NaturalGeodesic {
    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous_levels.is_empty()
    }

    pub fn vertex(&self, graph: &TileGraph, level: usize) -> usize {
        graph.vertex(TileId::new(level, self.tiles[level])).unwrap()
    }

    /// `|X^n - X^k| = |n - k|` for all levels.
    pub fn is_ray(&self, graph: &TileGraph) -> bool {
        let vs: Vec<usize> = (0..self.tiles.len()).map(|n| self.vertex(graph, n)).collect();
        (0..vs.len()).all(|n| (0..vs.len()).all(|k| graph.distance(vs[n], vs[k]) == n.abs_diff(k)))
    }
}

/// One tile per level containing `x`, chosen by `tie`.
pub fn natural_geodesic(cover: &CoverSequence, x: usize, tie: TieBreak) -> Result<NaturalGeodesic> {
    if x >= cover.n_points() {
        return Err(Error::InvalidParameter(format!("point {x} out of range")));
    }
    let idx = cover.index();
    let mut tiles = Vec::with_capacity(cover.depth() + 1);
    let mut ambiguous_levels = Vec::new();
    for n in 0..=cover.depth() {
        let c = &idx.containing[n][x];
        let t = match tie {
            TieBreak::Lowest => c.iter().min(),
            TieBreak::Highest => c.iter().max(),
        };
        let t = *t.ok_or(Error::CoverGap { point: x, level: n })?;
        if c.len() > 1 {
            ambiguous_levels.push(n);
        }
        tiles.push(t);
    }
    Ok(NaturalGeodesic { point: x, tiles, ambiguous_levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMetric {
    pub n: usize,
    pub lambda: f64,
    pub truncation: usize,
    /// `2 (X^N_x · X^N_y)`.
    pub doubled_products: Vec<i64>,
    /// `Λ^{-(X^N_x · X^N_y)}`, and 0 when both points share their last tile.
    pub d: Vec<f64>,
    pub geodesics: Vec<NaturalGeodesic>,
}

impl BoundaryMetric {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.d[x * self.n + y]
    }

    pub fn as_space(&self) -> FiniteMetricSpace {
        FiniteMetricSpace::from_flat_unchecked(self.n, self.d.clone())
    }

    /// Pairs with positive distance.
    pub fn mask(&self) -> Vec<bool> {
        self.d.iter().map(|&v| v > 0.0).collect()
    }
}

/// Natural geodesics of all points and the truncated boundary distances.
pub fn boundary_metric(cover: &CoverSequence, graph: &TileGraph, lambda: f64, tie: TieBreak) -> Result<BoundaryMetric> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {lambda}")));
    }
    let n = cover.n_points();
    let top = cover.depth();
    let geodesics: Vec<NaturalGeodesic> =
        (0..n).into_par_iter().map(|x| natural_geodesic(cover, x, tie)).collect::<Result<_>>()?;
    for g in &geodesics {
        assert!(g.is_ray(graph), "natural geodesic of point {} is not a ray", g.point);
    }
    let last: Vec<usize> = geodesics.iter().map(|g| g.vertex(graph, top)).collect();
    let doubled_products: Vec<i64> = (0..n * n).map(|i| graph.gromov_doubled(last[i / n], last[i % n])).collect();
    let d = doubled_products
        .iter()
        .map(|&p| if p >= 2 * top as i64 { 0.0 } else { lambda.powf(-(p as f64) / 2.0) })
        .collect();
    Ok(BoundaryMetric { n, lambda, truncation: top, doubled_products, d, geodesics })
}

/// Largest `max(r, 1/r)` with `r = sup{d(x,y) : x ∈ X, y ∈ Y} Λ^{(X·Y)}` over
/// distinct vertex pairs.
pub fn diam_comparability(space: &FiniteMetricSpace, cover: &CoverSequence, graph: &TileGraph, lambda: f64) -> (f64, Option<(TileId, TileId)>) {
    let v = graph.len();
    let best = (0..v)
        .into_par_iter()
        .map(|a| {
            let mut best = ArgMax::<(TileId, TileId)>::new();
            let ta = cover.tile(graph.vertices()[a]);
            for b in a + 1..v {
                let tb = cover.tile(graph.vertices()[b]);
                let sup = ta.iter().flat_map(|&x| tb.iter().map(move |&y| space.d(x, y))).fold(0.0, f64::max);
                if sup == 0.0 {
                    continue;
                }
                let r = sup * lambda.powf(graph.gromov_doubled(a, b) as f64 / 2.0);
                best.offer(r.max(1.0 / r), (graph.vertices()[a], graph.vertices()[b]));
            }
            best
        })
        .reduce(ArgMax::new, ArgMax::merge);
    (if best.key.is_some() { best.value } else { 1.0 }, best.key)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Injectivity {
    pub verdict: Verdict,
    /// First distinct pair with `d_∞ = 0`.
    pub witness: Option<(usize, usize)>,
    pub collapsed_pairs: usize,
    /// Surjectivity has no finite-level analogue.
    pub surjectivity: String,
}

/// PASS iff distinct points have positive boundary distance.
pub fn phi_injectivity_check(bm: &BoundaryMetric) -> Injectivity {
    let mut witness = None;
    let mut collapsed = 0;
    for x in 0..bm.n {
        for y in x + 1..bm.n {
            if bm.get(x, y) <= 0.0 {
                collapsed += 1;
                witness.get_or_insert((x, y));
            }
        }
    }
    Injectivity {
        verdict: Verdict::from_bool(collapsed == 0),
        witness,
        collapsed_pairs: collapsed,
        surjectivity: "not applicable".into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Snowflake,
    Quasisymmetry,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub class: Regularity,
    pub snowflake: SnowflakeFit,
    pub quasisymmetry: Option<QsFit>,
}

/// Snowflake fit of `d_∞` against `d` over separated pairs; when it fails,
/// a power quasisymmetry fit. `force_qs` runs both.
pub fn phi_regularity_check(space: &FiniteMetricSpace, bm: &BoundaryMetric, th: &Thresholds, force_qs: bool) -> RegularityReport {
    let mask = bm.mask();
    let dinf = bm.as_space();
    let snowflake = snowflake_check(space, &dinf, Some(&mask), th.snowflake);
    let quasisymmetry = (force_qs || !snowflake.verdict.is_pass())
        .then(|| fit_power_quasisymmetry(space, &dinf, Some(&mask), th.qs_cap));
    let class = if snowflake.verdict.is_pass() {
        Regularity::Snowflake
    } else if quasisymmetry.as_ref().is_some_and(|q| q.verdict.is_pass()) {
        Regularity::Quasisymmetry
    } else {
        Regularity::Fail
    };
    RegularityReport { class, snowflake, quasisymmetry }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieBreakSensitivity {
    /// Largest change of a doubled product between the two tie-breaks.
    pub max_doubled_change: i64,
    pub ambiguous_points: usize,
    /// Smallest `2(X^n · Y^n) - 2n` over points with two distinct geodesics.
    pub min_same_point_excess: Option<i64>,
}

/// Reruns the boundary with the highest-index tie-break and compares.
pub fn tie_break_sensitivity(cover: &CoverSequence, graph: &TileGraph, lambda: f64) -> Result<TieBreakSensitivity> {
    let lo = boundary_metric(cover, graph, lambda, TieBreak::Lowest)?;
    let hi = boundary_metric(cover, graph, lambda, TieBreak::Highest)?;
    let max_doubled_change =
        lo.doubled_products.iter().zip(&hi.doubled_products).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
    assert!(max_doubled_change <= 2, "tie-break changes a product by more than one");
    let mut ambiguous = 0;
    let mut min_excess: Option<i64> = None;
    for (a, b) in lo.geodesics.iter().zip(&hi.geodesics) {
        if a.tiles == b.tiles {
            continue;
        }
        ambiguous += 1;
        for n in 0..a.tiles.len() {
            let e = graph.gromov_doubled(a.vertex(graph, n), b.vertex(graph, n)) - 2 * n as i64;
            assert!(e >= -1, "geodesics of point {} separate at level {n}", a.point);
            min_excess = Some(min_excess.map_or(e, |m| m.min(e)));
        }
    }
    Ok(TieBreakSensitivity { max_doubled_change, ambiguous_points: ambiguous, min_same_point_excess: min_excess })
}
