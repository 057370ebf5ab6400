use std::f64::consts::PI;

use num_complex::Complex64;
use qvista::dynamics::DynamicalOptions;
use qvista::julia::{
    degree_probe, distortion_probe, julia_cover, julia_sample, verify_dynamical_qv, RationalMap, DEFAULT_RINGS,
    MAX_RINGS,
};
use qvista::sphere::spherical_distance;
use qvista::{Error, SpherePoint, Thresholds};

fn pt(re: f64, im: f64) -> SpherePoint {
    SpherePoint::from_complex(Complex64::new(re, im))
}

#[test]
fn parses_maps() {
    let g = RationalMap::parse("z^2-2").unwrap();
    assert_eq!(g.degree(), 2);
    assert!((g.num.eval(Complex64::new(3.0, 0.0)) - Complex64::new(7.0, 0.0)).norm() < 1e-12);
    let h = RationalMap::parse("(z^3 + 1)/(2*z)").unwrap();
    assert_eq!(h.degree(), 3);
    let w = h.apply(pt(1.0, 0.0));
    assert!(spherical_distance(w, pt(1.0, 0.0)) < 1e-12);
    assert!(RationalMap::parse("z^2 +").is_err());
    assert!(matches!(RationalMap::parse("z"), Err(Error::DegreeTooLow(1))));
    // the common factor z - 1 cancels down to z + 1
    assert!(matches!(RationalMap::parse("(z^2-1)/(z-1)"), Err(Error::DegreeTooLow(1))));
}

#[test]
fn infinity_is_handled() {
    let g = RationalMap::parse("z^2").unwrap();
    assert!(spherical_distance(g.apply(SpherePoint::infinity()), SpherePoint::infinity()) < 1e-12);
    let pre = g.preimages(pt(4.0, 0.0)).unwrap();
    assert_eq!(pre.len(), 2);
    for p in pre {
        assert!((p.to_complex().unwrap().norm() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn square_map_fixed_points() {
    let g = RationalMap::parse("z^2").unwrap();
    let fixed = g.fixed_points().unwrap();
    assert_eq!(fixed.len(), 3);
    let (seed, mult) = g.repelling_seed().unwrap();
    assert!(spherical_distance(seed, pt(1.0, 0.0)) < 1e-9);
    assert!((mult - 2.0).abs() < 1e-9);
}

#[test]
fn square_map_sample_is_roots_of_unity() {
    let g = RationalMap::parse("z^2").unwrap();
    let s = julia_sample(&g, 6, None).unwrap();
    assert_eq!(s.len(), 64);
    for k in 0..64 {
        let want = SpherePoint::from_complex(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0));
        assert!(s.points.iter().any(|&p| spherical_distance(p, want) < 1e-9), "root {k}");
    }
    assert!(s.invariance_error < 1e-9);
    // neighbours on the unit circle, spherical distance equals the arc length
    assert!((s.mesh - 2.0 * PI / 64.0).abs() < 1e-9, "{}", s.mesh);
}

#[test]
fn chebyshev_sample_is_real() {
    let g = RationalMap::parse("z^2-2").unwrap();
    let s = julia_sample(&g, 6, None).unwrap();
    assert!(s.len() > 30);
    for p in &s.points {
        let z = p.to_complex().unwrap();
        assert!(z.im.abs() < 1e-6 && z.re.abs() <= 2.0 + 1e-9, "{z}");
    }
    let pruned = julia_sample(&g, 6, Some(16)).unwrap();
    assert!(pruned.len() <= 16);
}

#[test]
fn degree_probes() {
    let sq = RationalMap::parse("z^2").unwrap();
    let p = degree_probe(&sq, pt(1.0, 0.0), 0.1, 4, DEFAULT_RINGS, MAX_RINGS).unwrap();
    assert_eq!(p.max, 1);
    assert_eq!(p.max_per_level.len(), 4);
    // level n holds 2^n components
    for (n, l) in p.degrees.iter().enumerate() {
        assert_eq!(l.len(), 1 << (n + 1));
    }
    let ch = RationalMap::parse("z^2-2").unwrap();
    let q = degree_probe(&ch, pt(-2.0, 0.0), 0.1, 4, DEFAULT_RINGS, MAX_RINGS).unwrap();
    assert_eq!(q.max, 2);
    assert!(degree_probe(&sq, pt(1.0, 0.0), 0.1, 13, DEFAULT_RINGS, MAX_RINGS).is_err());
}

#[test]
fn distortion_near_a_critical_point() {
    let g = RationalMap::parse("z^2").unwrap();
    let away = distortion_probe(&g, pt(1.0, 0.0), 0.2, DEFAULT_RINGS).unwrap();
    assert_eq!(away.local_degree, 1);
    let crit = distortion_probe(&g, pt(0.0, 0.0), 0.2, DEFAULT_RINGS).unwrap();
    assert_eq!(crit.local_degree, 2);
    assert!(crit.monotone);
    assert!(distortion_probe(&g, pt(1.0, 0.0), 0.2, 2).is_err());
}

#[test]
fn square_map_cover_is_dynamical() {
    let g = RationalMap::parse("z^2").unwrap();
    let sample = julia_sample(&g, 8, None).unwrap();
    let jc = julia_cover(&g, sample, PI / 8.0, 4, DEFAULT_RINGS, MAX_RINGS).unwrap();
    assert_eq!(jc.cover.depth(), 4);
    assert_eq!(jc.cover.level(0).len(), 1);
    assert!(jc.projection_error < 1e-9);
    assert_eq!(jc.pullback.dropped, 0);
    // 16 arcs of length pi/8, each level doubling them
    for n in 1..=4 {
        assert_eq!(jc.cover.level(n).len(), 16 << (n - 1), "level {n}");
    }
    let r = verify_dynamical_qv(&jc, &Thresholds::default(), &DynamicalOptions::default()).unwrap();
    assert!(r.condition("a").unwrap().verdict.is_pass());
    assert!(r.condition("b").unwrap().verdict.is_pass());
}
