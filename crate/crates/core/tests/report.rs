use std::path::PathBuf;

use qvista::fixtures::{cantor, tree};
use qvista::io::{
    load_cover, load_cover_standalone, load_json, load_map, load_space, load_thresholds, save_cover, save_json,
    save_space, MapFile,
};
use qvista::report::{format_float, render_text, to_canonical_json};
use qvista::verify::{verify_quasi_visual, verify_visual};
use qvista::{CoverSequence, Error, FiniteMetricSpace, Thresholds, VerificationReport};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qvista-report-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn failing_report() -> VerificationReport {
    let s = FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let c = CoverSequence::new(2, 0, Some(2.0), vec![vec![vec![0, 1]], vec![vec![0], vec![1]]]).unwrap();
    verify_visual(&s, &c, &Thresholds::default()).unwrap()
}

#[test]
fn canonical_json_round_trips() {
    let (s, c) = cantor(3, 4).unwrap();
    for r in [verify_quasi_visual(&s, &c, &Thresholds::default()).unwrap(), failing_report()] {
        let text = to_canonical_json(&r);
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(to_canonical_json(&back), text);
        assert_eq!(back.passed(), r.passed());
    }
}

#[test]
fn canonical_json_is_sorted_and_compact() {
    let v = serde_json::json!({"b": [1, 2.5], "a": {"z": true, "c": null}, "s": "x y"});
    assert_eq!(to_canonical_json(&v), r#"{"a":{"c":null,"z":true},"b":[1,2.5e0],"s":"x y"}"#);
}

#[test]
fn non_finite_constants_are_strings() {
    let text = to_canonical_json(&failing_report());
    assert!(text.contains(r#""constant":"inf""#), "{text}");
}

#[test]
fn floats_keep_fifteen_digits() {
    assert_eq!(format_float(1.0), "1e0");
    assert_eq!(format_float(0.1), "1e-1");
    assert_eq!(format_float(1.0 / 3.0), "3.33333333333333e-1");
    assert_eq!(format_float(-2.5e-10), "-2.5e-10");
    let x = std::f64::consts::PI;
    let back: f64 = format_float(x).parse().unwrap();
    assert!((back - x).abs() <= 1e-14 * x);
}

#[test]
fn text_render_lists_conditions() {
    let (s, c) = cantor(3, 4).unwrap();
    let r = verify_quasi_visual(&s, &c, &Thresholds::default()).unwrap();
    let text = render_text(&r);
    for id in ["i", "ii", "iii", "iv"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(id)), "{id}");
    }
    assert!(text.contains("k0 = "));
    assert!(text.trim_end().ends_with("verdict: PASS"), "{text}");
    let bad = render_text(&failing_report());
    assert!(bad.contains("witness ratio inf"));
    assert!(bad.trim_end().ends_with("verdict: FAIL"));
}

#[test]
fn space_and_cover_files() {
    let dir = scratch("files");
    let (s, c) = tree(3, 4).unwrap();
    save_space(&dir.join("space.json"), &s).unwrap();
    save_cover(&dir.join("sub/cover.json"), &c).unwrap();
    let s2 = load_space(&dir.join("space.json")).unwrap();
    assert_eq!(s2.matrix(), s.matrix());
    assert_eq!(s2.labels(), s.labels());
    let c2 = load_cover(&dir.join("sub/cover.json"), s.len()).unwrap();
    assert_eq!(c2.levels(), c.levels());
    assert_eq!(load_cover_standalone(&dir.join("sub/cover.json")).unwrap().levels(), c.levels());
    assert!(load_cover(&dir.join("sub/cover.json"), s.len() + 1).is_err());
    let text = std::fs::read_to_string(dir.join("space.json")).unwrap();
    assert!(text.ends_with('\n') && !text.trim_end().contains('\n'));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn thresholds_and_maps() {
    let dir = scratch("misc");
    let th = Thresholds::uniform(5.0);
    save_json(&dir.join("th.json"), &th).unwrap();
    assert_eq!(load_thresholds(&dir.join("th.json")).unwrap(), th);
    save_json(&dir.join("map.json"), &MapFile { map: vec![1, 0, 2] }).unwrap();
    assert_eq!(load_map(&dir.join("map.json")).unwrap(), vec![1, 0, 2]);
    std::fs::write(dir.join("bad.json"), r#"{"distances": [[0, 1], [2, 0]]}"#).unwrap();
    assert!(matches!(load_space(&dir.join("bad.json")), Err(Error::NonSymmetric(0, 1))));
    assert!(load_json::<MapFile>(&dir.join("missing.json")).is_err());
    std::fs::remove_dir_all(dir).unwrap();
}
