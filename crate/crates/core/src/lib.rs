//! Robust hypothesis testing between two distributions under the squared
//! Hellinger distance.
//!
//! The crate covers distribution primitives on binned supports, the usual
//! distances, Hellinger geodesics, a set of robust two-point tests, the
//! adversarial mixture family used for lower bounds, and a Monte Carlo harness
//! for estimating error probabilities.

pub mod adversarial;
pub mod decision;
pub mod dist;
pub mod divergences;
pub mod error;
pub mod geodesic;
pub mod harness;
pub mod numeric;
pub mod parallel;
pub mod reproduce;
pub mod serde_float;
pub mod synth;

pub use decision::{
    baraud_expected_statistic, midpoint_expected_statistic, run_test, ConstantTest,
    PreparedTest, RobustTest, TestDecision, TestFamily, TestSpec, Verdict,
};
pub use dist::{align_all, align_supports, mixture, BinnedDistribution, SampleBatch, Support};
pub use divergences::{bhattacharyya, hellinger_sq, sym_chi_sq, tv, DivergenceReport};
pub use error::{Error, Result};
pub use geodesic::{
    critical_radius, geodesic_angle, geodesic_fraction, geodesic_point, hellinger_midpoint,
    CriticalRadius, GeodesicPoint,
};
