use qvista::dynamics::{dynamical_checks, DynamicalOptions};
use qvista::fixtures::{cantor, circle_doubling_map, circle_dyadic, fixture, interval_dyadic, tree, FixtureParams, FIXTURE_NAMES};
use qvista::proximity::{
    chain_metrize, check_combinatorially_visual, compute_inf_proximity, compute_proximity, quasi_metric_from_m,
    synthesize_visual_metric, visual_characterization_check, QuasiMetric,
};
use qvista::quasisym::{fit_power_quasisymmetry, row_scaled_perturbation, snowflake_check};
use qvista::verify::verify_quasi_visual;
use qvista::{CoverSequence, Error, FiniteMetricSpace, Thresholds};

fn first_diff(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap()
}

#[test]
fn diagonal_is_sentinel() {
    let (_, c) = cantor(3, 4).unwrap();
    let t = compute_proximity(&c).unwrap();
    assert_eq!(t.sentinel(), 4);
    for x in 0..t.n_points {
        assert_eq!(t.get(x, x), 4);
    }
}

#[test]
fn tree_proximity_is_first_disagreement() {
    let (s, c) = tree(4, 5).unwrap();
    let t = compute_proximity(&c).unwrap();
    let labels = s.labels().unwrap();
    for x in 0..s.len() {
        for y in 0..s.len() {
            if x != y {
                let k = first_diff(&labels[x], &labels[y]);
                let expect = if k >= 4 { t.sentinel() } else { k };
                assert_eq!(t.get(x, y), expect, "{} {}", labels[x], labels[y]);
            }
        }
    }
}

#[test]
fn cantor_ends_separate_at_level_one() {
    let (_, c) = cantor(3, 4).unwrap();
    let t = compute_proximity(&c).unwrap();
    assert_eq!(t.get(0, t.n_points - 1), 0);
}

#[test]
fn proximity_grows_with_width() {
    for name in ["interval_dyadic", "cantor", "circle_dyadic"] {
        let (_, c) = fixture(name, FixtureParams::depth(3)).unwrap();
        let t0 = compute_proximity(&c.with_width(0)).unwrap();
        let t1 = compute_proximity(&c.with_width(1)).unwrap();
        for (a, b) in t0.m.iter().zip(&t1.m) {
            assert!(a <= b, "{name}");
        }
        let inf = compute_inf_proximity(&c, &compute_proximity(&c).unwrap()).unwrap();
        assert_eq!(inf.n_points, t0.n_points);
    }
}

#[test]
fn tree_is_ultrametric_combinatorially() {
    let (_, c) = tree(4, 5).unwrap();
    let t = compute_proximity(&c).unwrap();
    let cv = check_combinatorially_visual(&c, &t, &Thresholds::default());
    assert!(cv.report.passed());
    assert_eq!(cv.c_iv, 0.0);
}

#[test]
fn cantor_is_combinatorially_visual() {
    let (_, c) = cantor(4, 5).unwrap();
    let t = compute_proximity(&c).unwrap();
    let cv = check_combinatorially_visual(&c, &t, &Thresholds::default());
    assert!(cv.report.passed());
    assert!(cv.c_cv <= 1.0);
}

#[test]
fn quasi_visual_implies_combinatorially_visual() {
    let th = Thresholds::default();
    for name in FIXTURE_NAMES {
        for w in 0..2 {
            let (s, c) = fixture(name, FixtureParams::depth(3)).unwrap();
            let c = c.with_width(w);
            if verify_quasi_visual(&s, &c, &th).unwrap().passed() {
                let t = compute_proximity(&c).unwrap();
                assert!(check_combinatorially_visual(&c, &t, &th).report.passed(), "{name} width {w}");
            }
        }
    }
}

#[test]
fn tree_quasi_metric_is_the_metric() {
    let (s, c) = tree(4, 5).unwrap();
    let t = compute_proximity(&c).unwrap();
    let cv = check_combinatorially_visual(&c, &t, &Thresholds::default());
    let q = quasi_metric_from_m(&t, 2.0, cv.c_cv).unwrap();
    assert!(q.k <= 2.0);
    for x in 0..s.len() {
        for y in 0..s.len() {
            if x != y && !t.is_saturated(x, y) {
                assert_eq!(q.get(x, y), s.d(x, y));
            }
        }
    }
}

#[test]
fn zero_constant_gives_ultrametric() {
    let (_, c) = cantor(3, 4).unwrap();
    let t = compute_proximity(&c).unwrap();
    for lambda in [1.5, 3.0, 10.0] {
        assert_eq!(quasi_metric_from_m(&t, lambda, 0.0).unwrap().k, 1.0);
    }
    assert!(matches!(quasi_metric_from_m(&t, 3.0, 1.0), Err(Error::LambdaTooLarge { .. })));
}

#[test]
fn dyadic_quasi_metric_triples() {
    let (_, c) = interval_dyadic(3, 4).unwrap();
    let t = compute_proximity(&c).unwrap();
    let cv = check_combinatorially_visual(&c, &t, &Thresholds::default());
    assert!(cv.c_cv > 0.0);
    let lambda = 2f64.powf(1.0 / cv.c_cv);
    let q = quasi_metric_from_m(&t, lambda, cv.c_cv).unwrap();
    let n = q.n;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                assert!(q.get(x, y) <= q.k * q.get(x, z).max(q.get(z, y)) * (1.0 + 1e-12));
            }
        }
    }
}

fn qm(n: usize, q: Vec<f64>, k: f64) -> QuasiMetric {
    QuasiMetric { n, q, k, k_measured: k, lambda: 2.0 }
}

#[test]
fn chain_metric_examples() {
    let q = vec![0.0, 1.0, 1.9, 1.0, 0.0, 1.0, 1.9, 1.0, 0.0];
    let (d, sw) = chain_metrize(&qm(3, q.clone(), 1.9)).unwrap();
    assert_eq!(d.d(0, 2), 1.9);
    assert!(sw.holds);
    let metric = vec![0.0, 1.0, 1.5, 1.0, 0.0, 1.0, 1.5, 1.0, 0.0];
    let (d, _) = chain_metrize(&qm(3, metric.clone(), 1.5)).unwrap();
    assert_eq!(d.matrix(), &metric[..]);
    assert!(matches!(chain_metrize(&qm(3, q, 2.5)), Err(Error::KTooLarge(_))));
}

#[test]
fn chain_metric_shortcuts() {
    // q(0,2) = 3 is beaten by the chain through 1
    let q = vec![0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
    let (d, sw) = chain_metrize(&qm(3, q, 2.0)).unwrap();
    assert_eq!(d.d(0, 2), 2.0);
    assert!(sw.min_ratio >= 0.25);
}

#[test]
fn tree_chain_metric_equals_q() {
    let (_, c) = tree(3, 4).unwrap();
    let t = compute_proximity(&c).unwrap();
    let q = quasi_metric_from_m(&t, 2.0, 0.0).unwrap();
    let (d, sw) = chain_metrize(&q).unwrap();
    assert_eq!(d.matrix(), &q.q[..]);
    assert!(sw.holds && sw.min_ratio == 1.0);
}

#[test]
fn synthesized_metrics_are_visual() {
    let th = Thresholds::default();
    let (_, dy) = interval_dyadic(4, 5).unwrap();
    let (_, r) = synthesize_visual_metric(&dy, 1.2, &th).unwrap();
    assert!(r.passed());
    let (_, ca) = cantor(4, 5).unwrap();
    assert!(synthesize_visual_metric(&ca, 3.0, &th).unwrap().1.passed());
    let (s, tr) = tree(4, 5).unwrap();
    let (d, r) = synthesize_visual_metric(&tr, 2.0, &th).unwrap();
    assert!(r.passed());
    let k = r.derived["K"];
    for x in 0..s.len() {
        for y in 0..s.len() {
            if x != y {
                let ratio = d.d(x, y) / s.d(x, y);
                assert!(ratio <= 2.0 * k && 1.0 / ratio <= 2.0 * k);
            }
        }
    }
}

#[test]
fn repeated_cover_saturates_every_pair() {
    let c = CoverSequence::new(2, 0, None, vec![vec![vec![0, 1]]; 3]).unwrap();
    let t = compute_proximity(&c).unwrap();
    assert_eq!(t.get(0, 1), t.sentinel());
    assert!(t.is_saturated(0, 1));
    assert_eq!(t.floor(0, 1), 2);
}

#[test]
fn characterization_constants() {
    let th = Thresholds::default();
    let (s, c) = tree(4, 5).unwrap();
    let r = visual_characterization_check(&s, &c, 2.0, &th).unwrap();
    assert!((r.constant("vc") - 1.0).abs() <= 1e-12);
    let (s3, c3) = cantor(3, 5).unwrap();
    let (s5, c5) = cantor(5, 5).unwrap();
    let v3 = visual_characterization_check(&s3, &c3, 3.0, &th).unwrap();
    let v5 = visual_characterization_check(&s5, &c5, 3.0, &th).unwrap();
    assert!(v3.passed() && v5.passed());
    assert!(v5.constant("vc") <= 3.0 + 1e-9);
    let w3 = visual_characterization_check(&s3, &c3, 2.0, &th).unwrap().constant("vc");
    let w5 = visual_characterization_check(&s5, &c5, 2.0, &th).unwrap().constant("vc");
    assert!(w5 > w3 * 1.5, "{w3} {w5}");
    let (s7, c7) = cantor(7, 7).unwrap();
    let w7 = visual_characterization_check(&s7, &c7, 2.0, &Thresholds::uniform(w5)).unwrap();
    assert!(!w7.passed());
}

#[test]
fn identity_fit() {
    let (s, _) = cantor(3, 4).unwrap();
    let f = fit_power_quasisymmetry(&s, &s, None, 1e6);
    assert_eq!(f.forward.best.k, 1.0);
    assert_eq!(f.forward.best.nu, 1.0);
    assert!(f.verdict.is_pass());
    let sf = snowflake_check(&s, &s, None, 64.0);
    assert!((sf.alpha - 1.0).abs() < 1e-6 && (sf.c - 1.0).abs() < 1e-6);
}

#[test]
fn snowflake_fit_of_square_root() {
    let (s, _) = cantor(4, 5).unwrap();
    assert_eq!(s.len(), 64);
    let root = FiniteMetricSpace::from_fn(s.len(), |i, j| s.d(i, j).sqrt());
    let f = fit_power_quasisymmetry(&s, &root, None, 1e6);
    assert!(f.verdict.is_pass());
    assert!((f.forward.best.nu - 0.5).abs() <= 0.05 + 1e-9, "{:?}", f.forward.best);
    let sf = snowflake_check(&s, &root, None, 64.0);
    assert!((sf.alpha - 0.5).abs() < 1e-4);
}

#[test]
fn fit_against_synthesized_metrics() {
    let th = Thresholds::default();
    let (s, c) = cantor(4, 5).unwrap();
    let (d2, _) = synthesize_visual_metric(&c, 2.0, &th).unwrap();
    let (d4, _) = synthesize_visual_metric(&c, 4.0, &th).unwrap();
    assert!(fit_power_quasisymmetry(&s, &d2, None, th.qs_cap).verdict.is_pass());
    let sf = snowflake_check(&d2, &d4, None, th.snowflake);
    assert!(sf.verdict.is_pass());
    assert!((sf.alpha - 2.0).abs() < 1e-3, "{}", sf.alpha);
    let t = compute_proximity(&c).unwrap();
    let levels: Vec<usize> = (0..s.len()).map(|y| t.floor(0, y)).collect();
    let bad = row_scaled_perturbation(&s, &levels, 0, 1000.0);
    assert!(!snowflake_check(&s, &bad, None, th.snowflake).verdict.is_pass());
    let f = fit_power_quasisymmetry(&s, &bad, None, th.qs_cap);
    assert!(!f.verdict.is_pass());
}

#[test]
fn constant_cover_identity_map() {
    let (s, _) = cantor(3, 4).unwrap();
    let all: Vec<usize> = (0..s.len()).collect();
    let c = CoverSequence::new(s.len(), 0, None, vec![vec![all]; 4]).unwrap();
    let id: Vec<usize> = (0..s.len()).collect();
    let opts = DynamicalOptions { nu: Some(1.0), ..Default::default() };
    let r = dynamical_checks(&s, &c, &id, &opts, &Thresholds::default()).unwrap();
    assert!(r.passed());
}

#[test]
fn angle_doubling_on_circle() {
    let (s, c) = circle_dyadic(6, 10).unwrap();
    assert_eq!(s.len(), 1024);
    let g = circle_doubling_map(10);
    let th = Thresholds::default();
    let r = dynamical_checks(&s, &c.with_width(1), &g, &DynamicalOptions::default(), &th).unwrap();
    assert!(r.passed(), "{:?}", r.conditions);
    // the image of a sampled arc holds only every other sample point
    let opts = DynamicalOptions { exact_image: true, ..Default::default() };
    assert!(!dynamical_checks(&s, &c, &g, &opts, &th).unwrap().condition("a").unwrap().verdict.is_pass());
}

#[test]
fn shuffled_map_breaks_tile_shift() {
    let (s, c) = circle_dyadic(4, 6).unwrap();
    let mut g = circle_doubling_map(6);
    let n = g.len();
    // swap the images of two points a quarter turn apart
    g.swap(1, n / 4 + 1);
    let r = dynamical_checks(&s, &c, &g, &DynamicalOptions::default(), &Thresholds::default()).unwrap();
    let a = r.condition("a").unwrap();
    assert!(!a.verdict.is_pass());
    assert!(a.witness.is_some());
    let bad: Vec<usize> = (0..n).map(|k| if k == 0 { n } else { k }).collect();
    assert!(matches!(
        dynamical_checks(&s, &c, &bad, &DynamicalOptions::default(), &Thresholds::default()),
        Err(Error::MapNotClosed { point: 0, .. })
    ));
}
