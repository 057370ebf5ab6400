//! Sample spaces with their standard covers.
//!
//! | name                | space                                   | level-n tiles                  |
//! |---------------------|-----------------------------------------|--------------------------------|
//! | `cantor`            | endpoints of ternary intervals          | level-n ternary intervals      |
//! | `interval_dyadic`   | grid `k/2^s` of `[0,1]`                 | closed dyadic intervals        |
//! | `tree_example_3_7`  | sequences with `x_i ∈ {0..i}`           | points sharing `n` coordinates |
//! | `dyadic_interleaved`| grid `k/2^s` of `[0,1]`                 | `I^k` at `2k`, `I^{2k}` at `2k+1` |
//! | `sierpinski_gasket` | vertices of a subdivided gasket         | level-n sub-triangles          |
//! | `circle_dyadic`     | `2^s` equally spaced points, arc metric | closed dyadic arcs             |

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cover::CoverSequence;
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

pub const FIXTURE_NAMES: [&str; 6] =
    ["cantor", "interval_dyadic", "tree_example_3_7", "dyadic_interleaved", "sierpinski_gasket", "circle_dyadic"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    /// Cover depth `N`.
    pub depth: usize,
    /// Sampling depth; each fixture has its own default.
    pub sample_depth: Option<usize>,
}

impl FixtureParams {
    pub fn depth(depth: usize) -> Self {
        FixtureParams { depth, sample_depth: None }
    }

    pub fn sampled(depth: usize, sample_depth: usize) -> Self {
        FixtureParams { depth, sample_depth: Some(sample_depth) }
    }
}

pub fn fixture(name: &str, p: FixtureParams) -> Result<(FiniteMetricSpace, CoverSequence)> {
    match name {
        "cantor" => cantor(p.depth, p.sample_depth.unwrap_or(p.depth + 2)),
        "interval_dyadic" => interval_dyadic(p.depth, p.sample_depth.unwrap_or(p.depth + 2)),
        "tree_example_3_7" => tree(p.depth, p.sample_depth.unwrap_or(p.depth + 1)),
        "dyadic_interleaved" => dyadic_interleaved(p.depth, p.sample_depth),
        "sierpinski_gasket" => sierpinski(p.depth, p.sample_depth.unwrap_or(p.depth + 1)),
        "circle_dyadic" => circle_dyadic(p.depth, p.sample_depth.unwrap_or(p.depth + 2)),
        _ => Err(Error::InvalidParameter(format!("unknown fixture {name}"))),
    }
}

fn need(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn line_space(xs: &[f64]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs()).with_coords(xs.iter().map(|&x| vec![x]).collect())
}

/// Uniform grid of `points` points in `[0, 1]`.
pub fn grid_space(points: usize) -> FiniteMetricSpace {
    let xs: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1).max(1) as f64).collect();
    line_space(&xs)
}

/// The integers `0..points` with the usual distance.
pub fn integer_grid(points: usize) -> FiniteMetricSpace {
    let xs: Vec<f64> = (0..points).map(|k| k as f64).collect();
    line_space(&xs)
}

/// Endpoints of the `2^s` ternary intervals of generation `s`, in increasing
/// order, as integers over `3^s`.
fn cantor_numerators(s: usize) -> Vec<u64> {
    let mut left = vec![0u64];
    for _ in 0..s {
        left = left.iter().flat_map(|&l| [3 * l, 3 * l + 2]).collect();
    }
    let mut pts: Vec<u64> = left.iter().flat_map(|&l| [l, l + 1]).collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// `q < 3^n` with every ternary digit in `{0, 2}`.
fn is_cantor_index(mut q: u64, n: usize) -> bool {
    for _ in 0..n {
        if q % 3 == 1 {
            return false;
        }
        q /= 3;
    }
    q == 0
}

/// Cantor set sample of `2^{s+1}` points; level-`n` tiles are the sample
/// points of the `2^n` ternary intervals of generation `n`.
pub fn cantor(depth: usize, s: usize) -> Result<(FiniteMetricSpace, CoverSequence)> {
    need(depth <= s + 1, "cantor: depth may exceed the sampling depth by at most one")?;
    need(s <= 30, "cantor: sampling depth too large")?;
    let nums = cantor_numerators(s);
    let scale = 3f64.powi(s as i32);
    let xs: Vec<f64> = nums.iter().map(|&k| k as f64 / scale).collect();
    let space = line_space(&xs);
    let mut levels = Vec::new();
    for n in 0..=depth {
        // a point belongs to the interval given by the first n ternary digits
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut last: Option<u64> = None;
        for (i, &k) in nums.iter().enumerate() {
            let key = if n <= s {
                // interval index at generation n: floor(k * 3^n / 3^s), with the
                // right endpoint folded into its interval
                let width = 3u64.pow((s - n) as u32);
                let q = k / width;
                if k % width == 0 && !is_cantor_index(q, n) {
                    q - 1
                } else {
                    q
                }
            } else {
                k
            };
            if last != Some(key) {
                groups.push(Vec::new());
                last = Some(key);
            }
            groups.last_mut().unwrap().push(i);
        }
        levels.push(groups);
    }
    let cover = CoverSequence::new(space.len(), 0, Some(3.0), levels)?;
    Ok((space, cover))
}

fn dyadic_level(points: usize, s: usize, order: usize) -> Vec<Vec<usize>> {
    let step = 1usize << (s - order);
    (0..(1usize << order)).map(|k| (k * step..=(k + 1) * step).filter(|&p| p < points).collect()).collect()
}

/// Grid `k/2^s` with the closed dyadic intervals of generation `n` at
/// level `n`.
pub fn interval_dyadic(depth: usize, s: usize) -> Result<(FiniteMetricSpace, CoverSequence)> {
    need(depth <= s, "interval_dyadic: depth exceeds the sampling depth")?;
    let points = (1usize << s) + 1;
    let xs: Vec<f64> = (0..points).map(|k| k as f64 / (1u64 << s) as f64).collect();
    let space = line_space(&xs);
    let levels = (0..=depth).map(|n| dyadic_level(points, s, n)).collect();
    let cover = CoverSequence::new(points, 0, Some(2.0), levels)?;
    Ok((space, cover))
}

/// Dyadic generation used at level `n` of the interleaved cover.
pub fn interleaved_order(n: usize) -> usize {
    if n % 2 == 0 {
        n / 2
    } else {
        n - 1
    }
}

/// Grid of `[0,1]` with `X^{2k} = I^k` and `X^{2k+1} = I^{2k}`, where `I^j`
/// are the closed dyadic intervals of generation `j`.
pub fn dyadic_interleaved(depth: usize, s: Option<usize>) -> Result<(FiniteMetricSpace, CoverSequence)> {
    let min_s = (0..=depth).map(interleaved_order).max().unwrap_or(0);
    let s = s.unwrap_or(min_s);
    need(s >= min_s, "dyadic_interleaved: sampling depth too small")?;
    let points = (1usize << s) + 1;
    let xs: Vec<f64> = (0..points).map(|k| k as f64 / (1u64 << s) as f64).collect();
    let space = line_space(&xs);
    let levels = (0..=depth).map(|n| dyadic_level(points, s, interleaved_order(n))).collect();
    let cover = CoverSequence::new(points, 0, Some(2.0), levels)?;
    Ok((space, cover))
}

/// Sequences `(x_0, …, x_{D-1})` with `x_i ∈ {0, …, i}` (zero-extended), with
/// `d(x, y) = 2^{-m}` where `m` is the first index at which they differ. The
/// level-`n` tiles group the points agreeing in their first `n` entries.
pub fn tree(depth: usize, length: usize) -> Result<(FiniteMetricSpace, CoverSequence)> {
    need(length >= 1, "tree: sequence length must be positive")?;
    need(depth <= length, "tree: depth exceeds the sequence length")?;
    need(length <= 8, "tree: sequence length above 8 is too large")?;
    let mut seqs: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..length {
        seqs = seqs.iter().flat_map(|s| (0..=i).map(move |c| [s.as_slice(), &[c]].concat())).collect();
    }
    let first_diff = |a: &[usize], b: &[usize]| a.iter().zip(b).position(|(x, y)| x != y).unwrap();
    let space = FiniteMetricSpace::from_fn(seqs.len(), |i, j| 0.5f64.powi(first_diff(&seqs[i], &seqs[j]) as i32))
        .with_coords(seqs.iter().map(|s| s.iter().map(|&c| c as f64).collect()).collect())
        .with_labels(seqs.iter().map(|s| s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("")).collect());
    let mut levels = Vec::new();
    for n in 0..=depth {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, s) in seqs.iter().enumerate() {
            if i == 0 || seqs[i - 1][..n] != s[..n] {
                groups.push(Vec::new());
            }
            groups.last_mut().unwrap().push(i);
        }
        levels.push(groups);
    }
    let cover = CoverSequence::new(space.len(), 0, Some(2.0), levels)?;
    Ok((space, cover))
}

/// Vertices of the `3^s` sub-triangles of generation `s` of the gasket with
/// unit side; level-`n` tiles are the vertices inside each sub-triangle of
/// generation `n`.
pub fn sierpinski(depth: usize, s: usize) -> Result<(FiniteMetricSpace, CoverSequence)> {
    need(depth <= s, "sierpinski: depth exceeds the sampling depth")?;
    need(s <= 8, "sierpinski: sampling depth too large")?;
    let side = 1i64 << s;
    // lattice coordinates (a, b): position a * e1 + b * e2 with e1 = (1,0), e2 = (1/2, √3/2)
    let mut tris: Vec<(i64, i64)> = vec![(0, 0)];
    for g in 0..s {
        let h = side >> (g + 1);
        tris = tris.iter().flat_map(|&(a, b)| [(a, b), (a + h, b), (a, b + h)]).collect();
    }
    let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
    let mut pts: Vec<(i64, i64)> = Vec::new();
    let mut leaf_vertices: Vec<[usize; 3]> = Vec::with_capacity(tris.len());
    for &(a, b) in &tris {
        let mut v = [0usize; 3];
        for (t, c) in [(a, b), (a + 1, b), (a, b + 1)].into_iter().enumerate() {
            v[t] = *ids.entry(c).or_insert_with(|| {
                pts.push(c);
                pts.len() - 1
            });
        }
        leaf_vertices.push(v);
    }
    let unit = 1.0 / side as f64;
    let xy: Vec<(f64, f64)> =
        pts.iter().map(|&(a, b)| ((a as f64 + 0.5 * b as f64) * unit, (b as f64) * 3f64.sqrt() / 2.0 * unit)).collect();
    let space = FiniteMetricSpace::from_fn(pts.len(), |i, j| (xy[i].0 - xy[j].0).hypot(xy[i].1 - xy[j].1))
        .with_coords(xy.iter().map(|&(x, y)| vec![x, y]).collect());
    let mut levels = Vec::new();
    for n in 0..=depth {
        let per = 3usize.pow((s - n) as u32);
        let levels_n: Vec<Vec<usize>> = leaf_vertices
            .chunks(per)
            .map(|c| {
                let mut t: Vec<usize> = c.iter().flatten().cloned().collect();
                t.sort_unstable();
                t.dedup();
                t
            })
            .collect();
        levels.push(levels_n);
    }
    let cover = CoverSequence::new(space.len(), 0, Some(2.0), levels)?;
    Ok((space, cover))
}

/// `2^s` points `e^{2πij/2^s}` on the unit circle with the arc-length
/// metric; level `n >= 1` holds the closed arcs `[2πk/2^n, 2π(k+1)/2^n]`.
pub fn circle_dyadic(depth: usize, s: usize) -> Result<(FiniteMetricSpace, CoverSequence)> {
    need(depth <= s, "circle_dyadic: depth exceeds the sampling depth")?;
    let m = 1usize << s;
    let space = FiniteMetricSpace::from_fn(m, |i, j| {
        let k = (j - i).min(m - (j - i));
        2.0 * PI * k as f64 / m as f64
    })
    .with_coords((0..m).map(|j| {
        let t = 2.0 * PI * j as f64 / m as f64;
        vec![t.cos(), t.sin()]
    }).collect());
    let mut levels = vec![vec![(0..m).collect::<Vec<_>>()]];
    for n in 1..=depth {
        let step = m >> n;
        levels.push((0..(1usize << n)).map(|k| (k * step..=(k + 1) * step).map(|p| p % m).collect()).collect());
    }
    let cover = CoverSequence::new(m, 0, Some(2.0), levels)?;
    Ok((space, cover))
}

/// Angle doubling `j -> 2j mod 2^s` on the `circle_dyadic` sample.
pub fn circle_doubling_map(s: usize) -> Vec<usize> {
    let m = 1usize << s;
    (0..m).map(|j| (2 * j) % m).collect()
}
