//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qvista::builder::{adjust_radii, build_visual_width1, color_separated_set};
use qvista::dynamics::DynamicalOptions;
use qvista::fixtures::{cantor, dyadic_interleaved, fixture, grid_space, interval_dyadic, tree, FixtureParams};
use qvista::julia::{degree_probe, julia_cover, julia_sample, verify_dynamical_qv, RationalMap, DEFAULT_RINGS, MAX_RINGS};
use qvista::metric::{doubling_probe, maximal_separated_net};
use qvista::proximity::{
    chain_metrize, check_combinatorially_visual, compute_proximity, quasi_metric_from_m, synthesize_visual_metric,
    visual_characterization_check,
};
use qvista::quasisym::{fit_power_quasisymmetry, row_scaled_perturbation};
use qvista::tilegraph::{build_tile_graph, cluster_cover_sequence, compare_m_gromov, graph_map_check, hyperbolicity_constant, HyperbolicityMode};
use qvista::verify::{verify_quasi_visual, verify_visual};
use qvista::{CoverSequence, FiniteMetricSpace, SpherePoint, Thresholds};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Fixture corpus at moderate depths: name, space, cover.
fn corpus() -> Vec<(String, FiniteMetricSpace, CoverSequence)> {
    let specs: [(&str, usize, Option<usize>); 6] = [
        ("cantor", 4, Some(4)),
        ("interval_dyadic", 5, Some(5)),
        ("tree_example_3_7", 4, Some(5)),
        ("dyadic_interleaved", 5, None),
        ("sierpinski_gasket", 3, Some(3)),
        ("circle_dyadic", 5, Some(5)),
    ];
    specs
        .iter()
        .map(|&(name, depth, s)| {
            let (space, cover) = fixture(name, FixtureParams { depth, sample_depth: s }).expect("fixture builds");
            (name.to_string(), space, cover)
        })
        .collect()
}

fn c1_width1_construction() -> Outcome {
    let th = Thresholds::default();
    let cases: Vec<(&str, FiniteMetricSpace, f64, usize)> = vec![
        ("cantor", cantor(5, 7).map_err(|e| e.to_string())?.0, 3.0, 5),
        ("grid", grid_space(513), 2.0, 5),
        ("tree", tree(4, 6).map_err(|e| e.to_string())?.0, 2.0, 4),
    ];
    let mut out = Vec::new();
    for (name, space, lambda, depth) in cases {
        ensure!(space.len() <= 1500, "{name}: {} points", space.len());
        let t = Instant::now();
        let cover = ok(build_visual_width1(&space, lambda, depth, false))?;
        let r = ok(verify_visual(&space, &cover, &th))?;
        let el = t.elapsed();
        ensure!(r.passed(), "{name}: verify_visual FAIL");
        ensure!(cover.width == 1, "{name}: width {}", cover.width);
        let c2 = r.constant("C2");
        ensure!(c2 <= 2.0, "{name}: separation constant {c2} > 2");
        ensure!(el < Duration::from_secs(30), "{name}: {el:?}");
        out.push(format!("{name} C2={c2:.3}"));
    }
    Ok(out.join(", "))
}

fn c2_adjust_radii() -> Outcome {
    let mut pairs = 0usize;
    let mut nets = 0usize;
    for (name, space, cover) in corpus() {
        let lambda = cover.lambda.unwrap_or(2.0);
        for n in 0..=cover.depth() {
            let delta = lambda.powi(-(n as i32));
            let net = maximal_separated_net(&space, delta);
            let k = net.members.len();
            let colored = adjust_radii(&space, &color_separated_set(&space, &net));
            for closed in [false, true] {
                // independent pairwise check of the dichotomy
                let balls: Vec<Vec<usize>> = (0..k).map(|i| colored.ball(&space, i, closed)).collect();
                let gap = delta / (2.0 * colored.classes as f64);
                for a in 0..k {
                    for b in a + 1..k {
                        let meet = balls[a].iter().any(|p| balls[b].contains(p));
                        let dist = space.set_dist(&balls[a], &balls[b]);
                        ensure!(meet || dist >= gap, "{name} level {n}: balls {a}, {b} at {dist} < {gap}");
                        pairs += 1;
                    }
                }
                ensure!(colored.check_dichotomy(&space, closed).is_none(), "{name} level {n}: dichotomy check disagrees");
            }
            nets += 1;
        }
    }
    Ok(format!("{nets} nets, {pairs} ball pairs"))
}

/// `Λ` with `Λ^{C_cv} <= 2`, the fixture's own when possible.
fn synthesis_lambda(cover: &CoverSequence, c_cv: f64) -> f64 {
    let own = cover.lambda.unwrap_or(2.0);
    if c_cv <= 0.0 || own.powf(c_cv) <= 2.0 {
        own
    } else {
        2f64.powf(1.0 / c_cv)
    }
}

fn c3_sandwich() -> Outcome {
    let th = Thresholds::default();
    let mut out = Vec::new();
    for (name, _, cover) in corpus() {
        let table = ok(compute_proximity(&cover))?;
        let cv = check_combinatorially_visual(&cover, &table, &th);
        if !cv.c_cv.is_finite() {
            out.push(format!("{name} skipped (C_cv infinite)"));
            continue;
        }
        let lambda = synthesis_lambda(&cover, cv.c_cv);
        let qm = ok(quasi_metric_from_m(&table, lambda, cv.c_cv))?;
        ensure!(qm.k <= 2.0 + 1e-12, "{name}: K = {}", qm.k);
        let (d, s) = ok(chain_metrize(&qm))?;
        let n = d.len();
        for x in 0..n {
            for y in 0..n {
                let q = qm.get(x, y);
                ensure!(q / (2.0 * qm.k) <= d.d(x, y) && d.d(x, y) <= q, "{name}: ({x},{y}) d={} q={q}", d.d(x, y));
            }
        }
        ensure!(s.holds, "{name}: sandwich flag false");
        out.push(format!("{name} K={:.3}", qm.k));
    }
    Ok(out.join(", "))
}

fn c4_round_trip() -> Outcome {
    let th = Thresholds::default();
    let mut out = Vec::new();
    for (name, _, cover) in corpus() {
        let table = ok(compute_proximity(&cover))?;
        let cv = check_combinatorially_visual(&cover, &table, &th);
        if !cv.report.passed() {
            out.push(format!("{name} not cv"));
            continue;
        }
        let lambda = synthesis_lambda(&cover, cv.c_cv);
        let (d, report) = ok(synthesize_visual_metric(&cover, lambda, &th))?;
        let again = ok(verify_visual(&d, &cover.with_lambda(Some(lambda)), &th))?;
        ensure!(report.passed() && again.passed(), "{name}: synthesized metric fails verify_visual");
        ensure!(again.width == cover.width && again.lambda == Some(lambda), "{name}: width or lambda changed");
        let worst = again.constant("C1").max(again.constant("C2"));
        ensure!(worst <= 64.0, "{name}: constant {worst}");
        out.push(format!("{name} C={worst:.3}"));
    }
    Ok(out.join(", "))
}

fn c5_tree_exactness() -> Outcome {
    let th = Thresholds::default();
    let mut counts = Vec::new();
    // the level-n cylinder splits into n + 2 children at the next coordinate
    for depth in 2..=5 {
        let (space, cover) = ok(tree(depth, depth + 2))?;
        let r = ok(visual_characterization_check(&space, &cover.with_lambda(Some(2.0)), 2.0, &th))?;
        let c = r.constant("vc");
        ensure!((c - 1.0).abs() <= 1e-12, "depth {depth}: comparability {c}");
        let p = doubling_probe(&space, 0.5, 0);
        ensure!(p.count >= depth + 2, "depth {depth}: doubling count {} < {}", p.count, depth + 2);
        counts.push(p.count);
    }
    Ok(format!("comparability 1.0, doubling counts {counts:?} for depths 2..5"))
}

fn gromov_constant(cover: &CoverSequence) -> Result<f64, String> {
    let table = ok(compute_proximity(cover))?;
    let g = build_tile_graph(cover);
    Ok(compare_m_gromov(&g, cover, &table).constant)
}

fn c6_gromov_stability() -> Outcome {
    let mut out = Vec::new();
    for name in ["cantor", "tree"] {
        let build = |d: usize| -> Result<CoverSequence, String> {
            Ok(if name == "cantor" { ok(cantor(d, d))?.1 } else { ok(tree(d, d + 1))?.1 })
        };
        let c3 = gromov_constant(&build(3)?)?;
        let c4 = gromov_constant(&build(4)?)?;
        ensure!((c4 - c3).abs() <= 1.0, "{name}: C changes from {c3} to {c4}");
        out.push(format!("{name} C3={c3} C4={c4}"));
    }
    Ok(out.join(", "))
}

fn c7_hyperbolicity() -> Outcome {
    let th = Thresholds::default();
    let mut out = Vec::new();
    for (name, _, cover) in corpus() {
        let table = ok(compute_proximity(&cover))?;
        let cv = check_combinatorially_visual(&cover, &table, &th);
        if !cv.report.passed() {
            continue;
        }
        let g = build_tile_graph(&cover);
        let gc = compare_m_gromov(&g, &cover, &table);
        let h = ok(hyperbolicity_constant(&g, HyperbolicityMode::Exact))?;
        let bound = 2.0 * gc.constant + cv.c_cv;
        ensure!(h.constant <= bound, "{name}: C_Gamma {} > {bound}", h.constant);
        out.push(format!("{name} {}<={bound}", h.constant));
    }
    ensure!(!out.is_empty(), "no combinatorially visual fixture");
    Ok(out.join(", "))
}

fn c8_counterexample() -> Outcome {
    let th = Thresholds::uniform(4.0);
    let (space, cover) = ok(dyadic_interleaved(7, None))?;
    let r = ok(verify_quasi_visual(&space, &cover, &th))?;
    let iii = r.condition("iii").ok_or("no condition iii")?;
    ensure!(!iii.verdict.is_pass(), "condition (iii) passes with constant {}", iii.constant);
    ensure!(!r.passed(), "report passes");
    let diams = cover.diameters(&space);
    for k in 1..=3usize {
        let (a, b) = (2 * k, 2 * k + 1);
        let mut worst: f64 = 0.0;
        for (i, j) in cover.meeting_pairs(a, b) {
            let (x, y) = (diams[a][i], diams[b][j]);
            worst = worst.max(x.max(y) / x.min(y));
        }
        let want = (1u64 << k) as f64;
        ensure!(worst == want, "levels ({a},{b}): ratio {worst}, expected {want}");
        let rec = iii.per_level.iter().find(|l| l.level == a).ok_or(format!("no per-level record for {a}"))?;
        ensure!(rec.constant == want, "per-level record at {a}: {}", rec.constant);
    }
    let g = build_tile_graph(&cover);
    let cl = ok(cluster_cover_sequence(&g, &cover, 1))?.with_width(1);
    let rc = ok(verify_quasi_visual(&space, &cl, &th))?;
    ensure!(rc.passed(), "cluster cover fails: {:?}", rc.conditions.iter().map(|c| (&c.id, c.constant)).collect::<Vec<_>>());
    Ok(format!("(iii) = {} FAIL; cluster cover (iii) = {} PASS", iii.constant, rc.constant("iii")))
}

fn c9_graph_map() -> Outcome {
    let mut checked = 0;
    let covers = vec![("cantor", ok(cantor(4, 4))?.1), ("interval_dyadic", ok(interval_dyadic(4, 5))?.1), ("dyadic_interleaved", ok(dyadic_interleaved(5, None))?.1)];
    for (name, cover) in covers {
        let gx = build_tile_graph(&cover);
        for r in 0..=2 {
            let gv = build_tile_graph(&ok(cluster_cover_sequence(&gx, &cover, r))?);
            let c = ok(graph_map_check(&gx, &gv, r))?;
            ensure!(
                c.verdict.is_pass(),
                "{name} r={r}: {} lower, {} upper violations, tightest upper pair {:?}",
                c.lower_violations,
                c.upper_violations,
                c.upper_tight.map(|(s, a, b)| (s, gx.vertices()[a], gx.vertices()[b], gx.distance(a, b), gv.distance(a, b)))
            );
            checked += 1;
        }
    }
    Ok(format!("{checked} fixture/radius combinations, no violations"))
}

fn c10_julia_z2() -> Outcome {
    let t = Instant::now();
    let g = ok(RationalMap::parse("z^2"))?;
    let sample = ok(julia_sample(&g, 10, None))?;
    ensure!(sample.len() == 1024, "{} sample points", sample.len());
    let jc = ok(julia_cover(&g, sample, PI / 8.0, 6, DEFAULT_RINGS, MAX_RINGS))?;
    let r = ok(verify_dynamical_qv(&jc, &Thresholds::default(), &DynamicalOptions::default()))?;
    ensure!(r.width == 1, "width {}", r.width);
    ensure!(r.passed(), "verify_dynamical_qv FAIL: {:?}", r.conditions.iter().filter(|c| !c.verdict.is_pass()).map(|c| &c.id).collect::<Vec<_>>());
    let (rho, tau) = (r.derived["rho"], r.derived["tau"]);
    ensure!((0.45..=0.55).contains(&rho) && (0.45..=0.55).contains(&tau), "rho {rho}, tau {tau}");
    let mut max = 0;
    for j in 0..20 {
        let a = 2.0 * PI * (j as f64 + 0.37) / 20.0;
        let w = SpherePoint::from_complex(Complex64::from_polar(1.0, a));
        let p = ok(degree_probe(&g, w, 0.1, 6, DEFAULT_RINGS, MAX_RINGS))?;
        ensure!(p.max_per_level.len() == 6, "probe levels {}", p.max_per_level.len());
        max = max.max(p.max);
    }
    ensure!(max == 1, "max degree {max}");
    let el = t.elapsed();
    ensure!(el < Duration::from_secs(300), "runtime {el:?}");
    Ok(format!("rho={rho:.3} tau={tau:.3}, max degree 1 over 20 probes, {:.1}s", el.as_secs_f64()))
}

fn c11_julia_chebyshev() -> Outcome {
    let g = ok(RationalMap::parse("z^2-2"))?;
    let w = SpherePoint::from_complex(Complex64::new(-2.0, 0.0));
    let p = ok(degree_probe(&g, w, 0.1, 6, DEFAULT_RINGS, MAX_RINGS))?;
    ensure!(p.max == 2, "max degree {}", p.max);
    ensure!(p.max_per_level == vec![2; 6], "per-level maxima {:?}", p.max_per_level);
    let th = Thresholds::uniform(128.0);
    let sample = ok(julia_sample(&g, 12, None))?;
    let jc = ok(julia_cover(&g, sample, 0.25, 6, DEFAULT_RINGS, MAX_RINGS))?;
    let r = ok(verify_dynamical_qv(&jc, &th, &DynamicalOptions::default()))?;
    ensure!(r.width == 1, "width {}", r.width);
    ensure!(r.passed(), "verify_dynamical_qv FAIL: {:?}", r.conditions.iter().filter(|c| !c.verdict.is_pass()).map(|c| (&c.id, c.constant)).collect::<Vec<_>>());
    let worst = r.conditions.iter().filter_map(|c| c.threshold.map(|t| (c.constant, t))).filter(|(_, t)| *t > 1.0).map(|(c, _)| c).fold(0.0, f64::max);
    Ok(format!("degrees {:?}, verify PASS (largest constant {worst:.2} <= 128)", p.max_per_level))
}

fn c12_quasisymmetry() -> Outcome {
    let th = Thresholds::default();
    let mut out = Vec::new();
    for (name, space, cover) in corpus() {
        let qv = ok(verify_quasi_visual(&space, &cover, &th))?;
        if !qv.passed() {
            continue;
        }
        let table = ok(compute_proximity(&cover))?;
        let cv = check_combinatorially_visual(&cover, &table, &th);
        ensure!(cv.report.passed(), "{name}: quasi-visual but not combinatorially visual");
        let lambda = synthesis_lambda(&cover, cv.c_cv);
        let (d, _) = ok(synthesize_visual_metric(&cover, lambda, &th))?;
        let fit = fit_power_quasisymmetry(&space, &d, None, th.qs_cap);
        ensure!(fit.verdict.is_pass(), "{name}: fit fails (K {} / {})", fit.forward.best.k, fit.backward.best.k);
        let levels: Vec<usize> = (0..space.len()).map(|y| table.floor(0, y).min(cover.depth())).collect();
        let bad = row_scaled_perturbation(&space, &levels, 0, 1000.0);
        let neg = fit_power_quasisymmetry(&space, &bad, None, th.qs_cap);
        ensure!(!neg.verdict.is_pass(), "{name}: negative control passes");
        let all_exceed = |t: &[(f64, f64)]| t.iter().all(|&(_, k)| k > th.qs_cap);
        ensure!(all_exceed(&neg.forward.table) || all_exceed(&neg.backward.table), "{name}: some nu stays under the cap");
        out.push(format!("{name} K={:.1}", fit.forward.best.k.max(fit.backward.best.k)));
    }
    ensure!(!out.is_empty(), "no quasi-visual fixture");
    Ok(out.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 width-1 construction is visual", c1_width1_construction),
        ("2 adjusted radii dichotomy", c2_adjust_radii),
        ("3 chain metric sandwich", c3_sandwich),
        ("4 synthesized metric round trip", c4_round_trip),
        ("5 tree exactness and doubling", c5_tree_exactness),
        ("6 Gromov product vs proximity stability", c6_gromov_stability),
        ("7 hyperbolicity bound", c7_hyperbolicity),
        ("8 interleaved counterexample and cluster repair", c8_counterexample),
        ("9 cluster graph map inequalities", c9_graph_map),
        ("10 Julia z^2 end to end", c10_julia_z2),
        ("11 Julia z^2-2 degrees and verification", c11_julia_chebyshev),
        ("12 quasisymmetry detection", c12_quasisymmetry),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {msg}");
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
