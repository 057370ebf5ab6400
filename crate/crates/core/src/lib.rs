//! Multi-scale cover sequences of finite metric spaces.
//!
//! The crate builds and verifies visual and quasi-visual approximations,
//! computes proximity tables and the metrics they induce, studies tile graphs
//! and their boundaries, and builds dynamical covers of sampled Julia sets.

pub mod boundary;
pub mod builder;
pub mod cover;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod julia;
pub mod metric;
pub mod proximity;
pub mod quasisym;
pub mod report;
pub mod sphere;
pub mod tilegraph;
pub mod verify;

mod util;

pub use cover::{CoverSequence, TileId};
pub use error::{Error, Result};
pub use metric::FiniteMetricSpace;
pub use report::{ConditionRecord, Verdict, VerificationReport, Witness};
pub use sphere::SpherePoint;
pub use verify::Thresholds;
