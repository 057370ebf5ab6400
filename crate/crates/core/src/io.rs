//! JSON files for spaces, covers, thresholds and point maps.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cover::CoverSequence;
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::report::to_canonical_json;
use crate::verify::Thresholds;

/// On-disk form of a metric space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub distances: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl From<&FiniteMetricSpace> for SpaceFile {
    fn from(s: &FiniteMetricSpace) -> Self {
        SpaceFile { distances: s.rows(), coords: s.coords().map(|c| c.to_vec()), labels: s.labels().map(|l| l.to_vec()) }
    }
}

impl SpaceFile {
    pub fn into_space(self) -> Result<FiniteMetricSpace> {
        let n = self.distances.len();
        let mut s = FiniteMetricSpace::new(self.distances)?;
        if let Some(c) = self.coords {
            if c.len() != n {
                return Err(Error::InvalidParameter("coordinate count differs from point count".into()));
            }
            s = s.with_coords(c);
        }
        if let Some(l) = self.labels {
            if l.len() != n {
                return Err(Error::InvalidParameter("label count differs from point count".into()));
            }
            s = s.with_labels(l);
        }
        Ok(s)
    }
}

/// A self-map of the sample, by point index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFile {
    pub map: Vec<usize>,
}

fn write(path: &Path, text: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn save_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    write(path, to_canonical_json(v))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_space(path: &Path) -> Result<FiniteMetricSpace> {
    load_json::<SpaceFile>(path)?.into_space()
}

pub fn save_space(path: &Path, s: &FiniteMetricSpace) -> Result<()> {
    save_json(path, &SpaceFile::from(s))
}

/// Loads a cover of `n_points` points and validates it.
pub fn load_cover(path: &Path, n_points: usize) -> Result<CoverSequence> {
    load_json::<CoverSequence>(path)?.revalidated(n_points)
}

/// Loads a cover whose point count is taken from its level 0.
pub fn load_cover_standalone(path: &Path) -> Result<CoverSequence> {
    let c: CoverSequence = load_json(path)?;
    let n = c.levels().first().and_then(|l| l.first()).map_or(0, |t| t.len());
    c.revalidated(n)
}

pub fn save_cover(path: &Path, c: &CoverSequence) -> Result<()> {
    save_json(path, c)
}

pub fn load_thresholds(path: &Path) -> Result<Thresholds> {
    load_json(path)
}

pub fn load_map(path: &Path) -> Result<Vec<usize>> {
    Ok(load_json::<MapFile>(path)?.map)
}
