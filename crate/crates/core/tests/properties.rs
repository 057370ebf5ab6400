use proptest::prelude::*;
use qvista::fixtures::{cantor, fixture, interval_dyadic, FixtureParams, FIXTURE_NAMES};
use qvista::metric::maximal_separated_net;
use qvista::proximity::{chain_metrize, compute_proximity, QuasiMetric};
use qvista::quasisym::snowflake_check;
use qvista::report::to_canonical_json;
use qvista::tilegraph::build_tile_graph;
use qvista::verify::{verify_quasi_visual, verify_visual};
use qvista::{CoverSequence, FiniteMetricSpace, Thresholds};

fn line_space(xs: &[f64]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs())
}

fn distinct_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(0u32..10_000, 2..40).prop_map(|s| s.into_iter().map(|k| k as f64 / 1000.0).collect())
}

fn permute_cover(c: &CoverSequence, perm: &[usize]) -> CoverSequence {
    let levels = c
        .levels()
        .iter()
        .map(|l| l.iter().map(|t| t.iter().map(|&p| perm[p]).collect()).collect())
        .collect();
    CoverSequence::new(c.n_points(), c.width, c.lambda, levels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nets_are_separated_and_maximal(xs in distinct_points(), delta in 0.01f64..5.0) {
        let s = line_space(&xs);
        let net = maximal_separated_net(&s, delta);
        for (i, &a) in net.members.iter().enumerate() {
            for &b in &net.members[i + 1..] {
                prop_assert!(s.d(a, b) >= delta);
            }
        }
        for x in 0..s.len() {
            prop_assert!(net.members.iter().any(|&m| s.d(x, m) < delta));
        }
    }

    #[test]
    fn chain_metric_is_a_metric_within_the_sandwich(xs in distinct_points(), a in 0.3f64..1.0) {
        let n = xs.len();
        let q: Vec<f64> = (0..n * n).map(|i| (xs[i / n] - xs[i % n]).abs().powf(a)).collect();
        let k = 2f64.powf(a);
        let (d, sw) = chain_metrize(&QuasiMetric { n, q: q.clone(), k, k_measured: k, lambda: 2.0 }).unwrap();
        prop_assert!(d.validate().is_ok());
        prop_assert!(sw.holds);
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    let r = d.d(x, y) / q[x * n + y];
                    prop_assert!(r <= 1.0 + 1e-12);
                    prop_assert!(r >= 1.0 / (2.0 * k) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn snowflake_exponent_is_recovered(xs in distinct_points(), alpha in 0.3f64..2.0, c in 0.2f64..5.0) {
        let s = line_space(&xs);
        let exact = FiniteMetricSpace::from_fn(s.len(), |i, j| s.d(i, j).powf(alpha));
        let fit = snowflake_check(&s, &exact, None, 64.0);
        if (0..s.len()).any(|i| (0..i).any(|j| s.d(i, j).ln().abs() > 0.01)) {
            prop_assert!((fit.alpha - alpha).abs() < 1e-3, "{} vs {alpha}", fit.alpha);
        }
        prop_assert!(fit.c <= 1.0 + 1e-6);
        // a constant factor is absorbed by C, not necessarily by alpha
        let scaled = FiniteMetricSpace::from_fn(s.len(), |i, j| c * s.d(i, j).powf(alpha));
        let fit = snowflake_check(&s, &scaled, None, 64.0);
        prop_assert!(fit.c <= c.max(1.0 / c) * (1.0 + 1e-6));
    }

    #[test]
    fn reports_ignore_relabelling(seed in 0usize..1000, which in 0usize..FIXTURE_NAMES.len()) {
        let (s, c) = fixture(FIXTURE_NAMES[which], FixtureParams::depth(3)).unwrap();
        let n = s.len();
        let step = (0..n).map(|k| 2 * k + 1).find(|&k| gcd(k, n) == 1 && k > seed % n).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (step * i + seed) % n).collect();
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let ps = s.permuted(&inv);
        let pc = permute_cover(&c, &perm);
        let th = Thresholds::default();
        let a = verify_quasi_visual(&s, &c, &th).unwrap();
        let b = verify_quasi_visual(&ps, &pc, &th).unwrap();
        for id in ["i", "ii", "iii", "iv"] {
            prop_assert!((a.constant(id) - b.constant(id)).abs() <= 1e-9 * a.constant(id).abs().max(1.0), "{id}");
        }
        if c.lambda.is_some() {
            let va = verify_visual(&s, &c, &th).unwrap();
            let vb = verify_visual(&ps, &pc, &th).unwrap();
            prop_assert_eq!(va.passed(), vb.passed());
        }
    }

    #[test]
    fn proximity_is_symmetric_and_monotone(depth in 1usize..5, w in 0usize..3) {
        let (_, c) = interval_dyadic(depth, depth + 1).unwrap();
        let t = compute_proximity(&c.with_width(w)).unwrap();
        let t1 = compute_proximity(&c.with_width(w + 1)).unwrap();
        for x in 0..t.n_points {
            prop_assert_eq!(t.get(x, x), t.sentinel());
            for y in 0..t.n_points {
                prop_assert_eq!(t.get(x, y), t.get(y, x));
                prop_assert!(t.get(x, y) <= t1.get(x, y));
            }
        }
    }

    #[test]
    fn graph_distances_dominate_level_gaps(depth in 1usize..5) {
        let (_, c) = cantor(depth, depth).unwrap();
        let g = build_tile_graph(&c);
        for a in 0..g.len() {
            for b in 0..g.len() {
                prop_assert_eq!(g.distance(a, b), g.distance(b, a));
                prop_assert!(g.distance(a, b) >= g.level(a).abs_diff(g.level(b)));
                prop_assert!(g.gromov_doubled(a, b) >= 0);
            }
        }
    }

    #[test]
    fn thresholds_round_trip(c in 1.0f64..1e6) {
        let th = Thresholds::uniform(c);
        let text = to_canonical_json(&th);
        let back: Thresholds = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(to_canonical_json(&back), text);
        prop_assert!((back.comparability - c).abs() <= 1e-13 * c);
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}
