//! Ball covers built from separated nets.

use serde::{Deserialize, Serialize};

use crate::cover::CoverSequence;
use crate::error::{Error, Result};
use crate::metric::{doubling_probe, maximal_separated_net, FiniteMetricSpace, Net};

/// Default cap on the doubling probe used by [`build_visual_width0`].
pub const DEFAULT_DOUBLING_CAP: usize = 8;

/// A net split into colour classes, with radii in units of `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredNet {
    pub net: Net,
    /// Colour of each net member, `1..=classes`.
    pub colors: Vec<usize>,
    pub classes: usize,
    /// Radius of each net member in units of `delta`; empty until
    /// [`adjust_radii`] runs.
    pub radii: Vec<f64>,
}

impl ColoredNet {
    /// Separation constant `1 / (2N)`.
    pub fn separation(&self) -> f64 {
        1.0 / (2.0 * self.classes as f64)
    }

    /// Sample points of the open ball `B(x, r_x delta)` around member `k`
    /// (closed ball when `closed`).
    pub fn ball(&self, space: &FiniteMetricSpace, k: usize, closed: bool) -> Vec<usize> {
        ball(space, self.net.members[k], self.radii[k] * self.net.delta, closed)
    }

    /// Checks that every pair of balls either meets or is at distance at
    /// least `delta / (2N)`; returns the first offending pair of members.
    pub fn check_dichotomy(&self, space: &FiniteMetricSpace, closed: bool) -> Option<(usize, usize)> {
        let balls: Vec<Vec<usize>> = (0..self.net.members.len()).map(|k| self.ball(space, k, closed)).collect();
        let gap = self.net.delta * self.separation();
        let n = space.len();
        let mut mark = vec![usize::MAX; n];
        for a in 0..balls.len() {
            for &p in &balls[a] {
                mark[p] = a;
            }
            for b in a + 1..balls.len() {
                let meet = balls[b].iter().any(|&p| mark[p] == a);
                if !meet && space.set_dist(&balls[a], &balls[b]) < gap {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

fn ball(space: &FiniteMetricSpace, center: usize, radius: f64, closed: bool) -> Vec<usize> {
    let row = space.row(center);
    (0..space.len()).filter(|&p| if closed { row[p] <= radius } else { row[p] < radius }).collect()
}

fn check_resolution(space: &FiniteMetricSpace, level: usize, scale: f64) -> Result<()> {
    let resolution = space.min_distance();
    if space.len() >= 2 && scale < 2.0 * resolution {
        return Err(Error::ResolutionExceeded { level, scale, resolution });
    }
    Ok(())
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {lambda}")));
    }
    Ok(())
}

/// Width-one cover: level `n` consists of the balls `B(x, 2Λ^{-n})` around
/// a maximal `Λ^{-n}`-separated net.
pub fn build_visual_width1(space: &FiniteMetricSpace, lambda: f64, depth: usize, closed: bool) -> Result<CoverSequence> {
    validate_lambda(lambda)?;
    let mut levels = vec![vec![(0..space.len()).collect::<Vec<_>>()]];
    for n in 1..=depth {
        let delta = lambda.powi(-(n as i32));
        check_resolution(space, n, delta)?;
        let net = maximal_separated_net(space, delta);
        levels.push(net.members.iter().map(|&x| ball(space, x, 2.0 * delta, closed)).collect());
    }
    CoverSequence::new(space.len(), 1, Some(lambda), levels)
}

/// Colour classes `A_1, A_2, …`: each class is a greedy maximal
/// `10δ`-separated subset of the members not yet coloured.
pub fn color_separated_set(space: &FiniteMetricSpace, net: &Net) -> ColoredNet {
    let sep = 10.0 * net.delta;
    let m = net.members.len();
    let mut colors = vec![0usize; m];
    let mut classes = 0;
    let mut left = m;
    while left > 0 {
        classes += 1;
        let mut chosen: Vec<usize> = Vec::new();
        for k in 0..m {
            if colors[k] != 0 {
                continue;
            }
            let row = space.row(net.members[k]);
            if chosen.iter().all(|&c| row[net.members[c]] >= sep) {
                chosen.push(k);
                colors[k] = classes;
                left -= 1;
            }
        }
    }
    ColoredNet { net: net.clone(), colors, classes, radii: Vec::new() }
}

/// Radii for the coloured balls. Class one gets radius 1. A member `x` of a
/// later class looks at the balls `B_y` already placed, collects the values
/// `dist(x, B_y)/δ` lying in `[1, 2)`, adds the end points 1 and 2, and takes
/// the midpoint of the widest gap.
pub fn adjust_radii(space: &FiniteMetricSpace, colored: &ColoredNet) -> ColoredNet {
    let mut out = colored.clone();
    let members = &colored.net.members;
    let delta = colored.net.delta;
    let mut radii = vec![0.0; members.len()];
    let mut placed: Vec<(usize, Vec<usize>)> = Vec::new();
    for class in 1..=colored.classes {
        let current: Vec<usize> = (0..members.len()).filter(|&k| colored.colors[k] == class).collect();
        let mut fresh = Vec::new();
        for &k in &current {
            let r = if class == 1 {
                1.0
            } else {
                let row = space.row(members[k]);
                let mut vals = vec![1.0, 2.0];
                for (_, b) in &placed {
                    let d = b.iter().map(|&p| row[p]).fold(f64::INFINITY, f64::min) / delta;
                    if (1.0..2.0).contains(&d) {
                        vals.push(d);
                    }
                }
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let (mut lo, mut hi) = (1.0, 1.0);
                for w in vals.windows(2) {
                    if w[1] - w[0] > hi - lo {
                        lo = w[0];
                        hi = w[1];
                    }
                }
                0.5 * (lo + hi)
            };
            radii[k] = r;
            fresh.push((k, ball(space, members[k], r * delta, false)));
        }
        placed.extend(fresh);
    }
    out.radii = radii;
    out
}

/// Width-zero cover: level `n` consists of the balls `B(s, r_s Λ^{-n})` of
/// the coloured maximal `Λ^{-n}`-net with adjusted radii. Fails with
/// `DoublingUnbounded` when the doubling probe at `λ = 1/2` exceeds
/// `doubling_cap`.
pub fn build_visual_width0(
    space: &FiniteMetricSpace,
    lambda: f64,
    depth: usize,
    closed: bool,
    doubling_cap: usize,
) -> Result<(CoverSequence, Vec<ColoredNet>)> {
    validate_lambda(lambda)?;
    let probe = doubling_probe(space, 0.5, 0);
    if probe.count > doubling_cap {
        return Err(Error::DoublingUnbounded { count: probe.count, cap: doubling_cap });
    }
    let mut levels = vec![vec![(0..space.len()).collect::<Vec<_>>()]];
    let mut nets = Vec::new();
    for n in 1..=depth {
        let delta = lambda.powi(-(n as i32));
        check_resolution(space, n, delta)?;
        let net = maximal_separated_net(space, delta);
        let colored = adjust_radii(space, &color_separated_set(space, &net));
        levels.push((0..net.members.len()).map(|k| colored.ball(space, k, closed)).collect());
        nets.push(colored);
    }
    Ok((CoverSequence::new(space.len(), 0, Some(lambda), levels)?, nets))
}
