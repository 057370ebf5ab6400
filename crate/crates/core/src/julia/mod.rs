//! Julia sets of rational maps: sampling, pull-back covers and probes.

pub mod cover;
pub mod mesh;
pub mod probes;
pub mod rational;
pub mod sample;

pub use cover::{
    admissible_cover, induce_tiles, julia_cover, pullback_cover, verify_dynamical_qv, AmbientRegion, JuliaCover,
    Pullback, DEFAULT_RINGS, MAX_RINGS,
};
pub use probes::{degree_probe, distortion_probe, DegreeProbe, DistortionProbe, DistortionRow};
pub use rational::{Poly, RationalMap};
pub use sample::{julia_sample, map_on_sample, JuliaSample};
