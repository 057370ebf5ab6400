//! Verification reports, canonical JSON rendering and text summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cover::TileId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn and(self, o: Verdict) -> Verdict {
        Verdict::from_bool(self.is_pass() && o.is_pass())
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_pass() { "PASS" } else { "FAIL" })
    }
}

/// Tiles and points responsible for a constant, with the offending ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tiles: Vec<TileId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<usize>,
    #[serde(with = "float")]
    pub ratio: f64,
}

impl Witness {
    pub fn tiles(tiles: Vec<TileId>, ratio: f64) -> Self {
        Witness { tiles, points: Vec::new(), ratio }
    }

    pub fn points(points: Vec<usize>, ratio: f64) -> Self {
        Witness { tiles: Vec::new(), points, ratio }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    #[serde(with = "float")]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub id: String,
    pub description: String,
    #[serde(with = "float")]
    pub constant: f64,
    #[serde(default, with = "float_opt", skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_level: Vec<LevelRecord>,
}

impl ConditionRecord {
    /// Record whose verdict is `constant <= threshold`.
    pub fn bounded(id: &str, description: &str, constant: f64, threshold: f64, witness: Option<Witness>) -> Self {
        ConditionRecord {
            id: id.into(),
            description: description.into(),
            constant,
            threshold: Some(threshold),
            verdict: Verdict::from_bool(constant <= threshold),
            witness,
            per_level: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: String,
    pub truncation: usize,
    pub width: usize,
    #[serde(default, with = "float_opt")]
    pub lambda: Option<f64>,
    pub conditions: Vec<ConditionRecord>,
    #[serde(default, with = "float_map")]
    pub derived: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn new(kind: &str, truncation: usize, width: usize, lambda: Option<f64>) -> Self {
        VerificationReport {
            kind: kind.into(),
            truncation,
            width,
            lambda,
            conditions: Vec::new(),
            derived: BTreeMap::new(),
            notes: Vec::new(),
            verdict: Verdict::Pass,
        }
    }

    /// Recomputes the overall verdict from the condition records.
    pub fn finish(mut self) -> Self {
        self.verdict = Verdict::from_bool(self.conditions.iter().all(|c| c.verdict.is_pass()));
        self
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn constant(&self, id: &str) -> f64 {
        self.condition(id).map(|c| c.constant).unwrap_or(f64::NAN)
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }
}

/// Provenance of a CLI run; embedded in every report it emits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.into(),
            inputs: BTreeMap::new(),
            parameters: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.parameters.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }
}

/// Canonical JSON of any serializable value: sorted keys, no whitespace,
/// floats with 15 significant digits.
pub fn to_canonical_json<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("report values serialize");
    render_json(&value)
}

pub fn render_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                write_value(out, &m[k]);
            }
            out.push('}');
        }
    }
}

/// Fifteen significant digits in exponent form, trailing zeros trimmed.
pub fn format_float(x: f64) -> String {
    let s = format!("{:.14e}", x);
    let (mant, exp) = s.split_once('e').unwrap();
    let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
    format!("{mant}e{exp}")
}

/// Human-readable summary table.
pub fn render_text(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} report (levels 0..{}, width {})", r.kind, r.truncation, r.width);
    if let Some(l) = r.lambda {
        let _ = writeln!(s, "lambda = {}", fmt_num(l));
    }
    let _ = writeln!(s, "{:<8} {:>14} {:>12} {:>7}  {}", "cond", "constant", "threshold", "verdict", "description");
    for c in &r.conditions {
        let th = c.threshold.map(fmt_num).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:<8} {:>14} {:>12} {:>7}  {}", c.id, fmt_num(c.constant), th, c.verdict, c.description);
        if let Some(w) = &c.witness {
            let tiles: Vec<String> = w.tiles.iter().map(|t| format!("({},{})", t.level, t.index)).collect();
            let _ = writeln!(s, "{:<8} witness ratio {} tiles [{}] points {:?}", "", fmt_num(w.ratio), tiles.join(" "), w.points);
        }
    }
    for (k, v) in &r.derived {
        let _ = writeln!(s, "{k} = {}", fmt_num(*v));
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "verdict: {}", r.verdict);
    s
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{:.6}", x)
    } else {
        format!("{x}")
    }
}

/// Serde adapter for floats that may be infinite or NaN; those are written
/// as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod float {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        N(f64),
        S(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::N(x) => Ok(x),
            Repr::S(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(D::Error::custom(format!("bad float {s}"))),
            },
        }
    }
}

pub mod float_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::float::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    struct W(#[serde(with = "super::float")] f64);

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

pub mod float_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct W(#[serde(with = "super::float")] f64);

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &W(*v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let m = BTreeMap::<String, W>::deserialize(d)?;
        Ok(m.into_iter().map(|(k, w)| (k, w.0)).collect())
    }
}
