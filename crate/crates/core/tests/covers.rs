use qvista::fixtures::{cantor, dyadic_interleaved, fixture, interval_dyadic, tree, FixtureParams, FIXTURE_NAMES};
use qvista::verify::{ball_tile_comparability, derive_rho_tau_nu, quasiball_check, verify_quasi_visual, verify_visual};
use qvista::{CoverSequence, Error, FiniteMetricSpace, Thresholds, TileId};

fn trivial(space: &FiniteMetricSpace, depth: usize) -> CoverSequence {
    let all: Vec<usize> = (0..space.len()).collect();
    CoverSequence::new(space.len(), 0, Some(2.0), vec![vec![all]; depth + 1]).unwrap()
}

#[test]
fn cover_must_start_with_whole_space() {
    assert!(matches!(CoverSequence::new(3, 0, None, vec![vec![vec![0, 1]]]), Err(Error::InvalidCover(_))));
    assert!(matches!(
        CoverSequence::new(3, 0, None, vec![vec![vec![0, 1, 2]], vec![vec![0], vec![2]]]),
        Err(Error::CoverGap { point: 1, level: 1 })
    ));
}

#[test]
fn u_w_of_width_zero_is_the_tile() {
    let (_, c) = interval_dyadic(3, 4).unwrap();
    for n in 0..=3 {
        for i in 0..c.level(n).len() {
            assert_eq!(c.u_w_neighborhood(TileId::new(n, i), 0).unwrap(), vec![i]);
        }
    }
}

#[test]
fn u_w_on_disjoint_cantor_tiles() {
    let (_, c) = cantor(2, 4).unwrap();
    for i in 0..4 {
        assert_eq!(c.u_w_neighborhood(TileId::new(2, i), 3).unwrap(), vec![i]);
    }
}

#[test]
fn u_w_on_dyadic_halves() {
    let (space, c) = interval_dyadic(1, 3).unwrap();
    let left = c.tile(TileId::new(1, 0));
    assert_eq!(space.set_diam(left), 0.5);
    assert_eq!(c.u_w_neighborhood(TileId::new(1, 0), 1).unwrap(), vec![0, 1]);
}

#[test]
fn u_w_is_nested() {
    let (_, c) = interval_dyadic(4, 5).unwrap();
    for i in 0..c.level(4).len() {
        let mut prev = Vec::new();
        for w in 0..5 {
            let u = c.u_w_neighborhood(TileId::new(4, i), w).unwrap();
            assert!(prev.iter().all(|t| u.contains(t)));
            prev = u;
        }
    }
    assert!(matches!(c.u_w_neighborhood(TileId::new(9, 0), 1), Err(Error::UnknownTile { .. })));
}

#[test]
fn cantor_is_exactly_visual() {
    let (s, c) = cantor(5, 6).unwrap();
    let r = verify_visual(&s, &c.with_lambda(Some(3.0)), &Thresholds::default()).unwrap();
    assert!(r.passed());
    assert!((r.constant("C1") - 1.0).abs() < 1e-9);
    assert!((r.constant("C2") - 1.0).abs() < 1e-9);
    assert_eq!(r.truncation, 5);
}

#[test]
fn tree_is_visual_with_lambda_two() {
    let (s, c) = tree(4, 5).unwrap();
    let r = verify_visual(&s, &c, &Thresholds::default()).unwrap();
    assert!(r.passed());
    assert!(r.constant("C1").is_finite() && r.constant("C2").is_finite());
}

#[test]
fn singleton_tile_fails_with_witness() {
    let s = FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let c = CoverSequence::new(2, 0, Some(2.0), vec![vec![vec![0, 1]], vec![vec![0], vec![1]]]).unwrap();
    let r = verify_visual(&s, &c, &Thresholds::default()).unwrap();
    let c1 = r.condition("C1").unwrap();
    assert!(!c1.verdict.is_pass());
    assert!(c1.constant.is_infinite());
    assert_eq!(c1.witness.as_ref().unwrap().tiles[0].level, 1);
    assert!(!r.passed());
}

#[test]
fn visual_needs_lambda() {
    let (s, c) = cantor(2, 3).unwrap();
    assert!(verify_visual(&s, &c.with_lambda(None), &Thresholds::default()).is_err());
}

#[test]
fn cantor_is_quasi_visual() {
    let (s, c) = cantor(4, 5).unwrap();
    let r = verify_quasi_visual(&s, &c, &Thresholds::default()).unwrap();
    assert!(r.passed());
    assert_eq!(r.derived["k0"], 1.0);
    assert!((r.derived["lambda_iv"] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn interleaved_fails_condition_three() {
    let (s, c) = dyadic_interleaved(3, None).unwrap();
    let r = verify_quasi_visual(&s, &c, &Thresholds::default()).unwrap();
    let iii = r.condition("iii").unwrap();
    assert_eq!(iii.constant, 2.0);
    let strict = verify_quasi_visual(&s, &c, &Thresholds::uniform(1.5)).unwrap();
    assert!(!strict.condition("iii").unwrap().verdict.is_pass());
    let (s7, c7) = dyadic_interleaved(7, None).unwrap();
    let r7 = verify_quasi_visual(&s7, &c7, &Thresholds::uniform(4.0)).unwrap();
    let iii7 = r7.condition("iii").unwrap();
    assert!(!iii7.verdict.is_pass());
    for k in 1..=3 {
        let rec = iii7.per_level.iter().find(|l| l.level == 2 * k).unwrap();
        assert_eq!(rec.constant, (1u32 << k) as f64);
    }
    let w = iii7.witness.as_ref().unwrap();
    assert_eq!((w.tiles[0].level, w.tiles[1].level), (6, 7));
    assert_eq!(w.ratio, 8.0);
}

#[test]
fn visual_implies_quasi_visual_and_widening() {
    let th = Thresholds::default();
    for name in FIXTURE_NAMES {
        let (s, c) = fixture(name, FixtureParams::depth(3)).unwrap();
        if c.lambda.is_none() {
            continue;
        }
        for w in 0..2 {
            let cw = c.with_width(w);
            let v = verify_visual(&s, &cw, &th).unwrap();
            let q = verify_quasi_visual(&s, &cw, &th).unwrap();
            if v.passed() {
                assert!(q.passed(), "{name} width {w}");
                assert!(verify_visual(&s, &c.with_width(w + 1), &th).unwrap().passed(), "{name} widened from {w}");
            }
            if q.passed() {
                assert!(verify_quasi_visual(&s, &c.with_width(w + 1), &th).unwrap().passed(), "{name} widened from {w}");
            }
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let (s, c) = interval_dyadic(4, 6).unwrap();
    let th = Thresholds::default();
    assert_eq!(verify_quasi_visual(&s, &c, &th).unwrap(), verify_quasi_visual(&s, &c, &th).unwrap());
    assert_eq!(verify_visual(&s, &c, &th).unwrap(), verify_visual(&s, &c, &th).unwrap());
}

#[test]
fn cantor_rates() {
    let (s, c) = cantor(5, 6).unwrap();
    let f = derive_rho_tau_nu(&s, &c).unwrap();
    assert!((f.rho - 1.0 / 3.0).abs() < 1e-9);
    assert!((f.tau - 1.0 / 3.0).abs() < 1e-9);
    assert!((f.nu - 1.0).abs() < 1e-9);
}

#[test]
fn repeated_cover_has_no_rate() {
    let (s, _) = cantor(3, 3).unwrap();
    assert!(matches!(derive_rho_tau_nu(&s, &trivial(&s, 4)), Err(Error::FitFailure(_))));
}

#[test]
fn quasiball_constants() {
    let (s, c) = cantor(4, 5).unwrap();
    let q = quasiball_check(&s, &c);
    assert!(q.r0 > 0.3 && q.big_r0 <= 1.0 + 1e-12, "{q:?}");
    let t = quasiball_check(&s, &trivial(&s, 3));
    assert_eq!((t.r0, t.big_r0), (1.0, 1.0));
    let (sd, cd) = interval_dyadic(4, 6).unwrap();
    let qd = quasiball_check(&sd, &cd);
    assert!(qd.r0 >= 0.5 - 1.0 / 16.0, "{qd:?}");
}

#[test]
fn ball_comparability() {
    let (s, c) = cantor(4, 5).unwrap();
    let r = verify_quasi_visual(&s, &c, &Thresholds::default()).unwrap();
    let (c0, _) = ball_tile_comparability(&s, &c, 1e-9);
    assert_eq!(c0, r.constant("i"));
    let (c2, _) = ball_tile_comparability(&s, &c, 2.0);
    assert!(c2 <= 3.0, "{c2}");
    assert_eq!(ball_tile_comparability(&s, &trivial(&s, 3), 2.0).0, 1.0);
}
