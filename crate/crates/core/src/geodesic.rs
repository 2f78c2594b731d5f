//! Hellinger geodesics.
//!
//! Square roots of distributions live on the unit sphere of `ℓ₂`, and the
//! angle `θ` between `√p₁` and `√p₂` satisfies `cos θ = B(p₁, p₂)`. The
//! great-circle arc between them is
//!
//! ```text
//! √q_φ = (sin(θ − φ) √p₁ + sin φ √p₂) / sin θ,    0 ≤ φ ≤ θ,
//! ```
//!
//! whose midpoint `u = q_{θ/2}` sits at squared Hellinger distance
//! `r* = 1 − cos(θ/2)` from both endpoints.

use serde::{Deserialize, Serialize};

use crate::dist::BinnedDistribution;
use crate::divergences::hellinger_sq_masses;
use crate::error::{Error, Result};

/// A point on the geodesic from `p₁` (at `phi = 0`) to `p₂` (at `phi = theta`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPoint {
    pub phi: f64,
    pub theta: f64,
    pub distribution: BinnedDistribution,
}

/// Angle between `√p₁` and `√p₂`.
///
/// Computed from the chord length, `θ = 2 asin(√(H²/2))`, which stays
/// accurate when the endpoints are close and never leaves `[0, π/2]`.
pub fn geodesic_angle(p1: &BinnedDistribution, p2: &BinnedDistribution) -> Result<f64> {
    p1.check_aligned(p2)?;
    Ok(angle_from_masses(p1.masses(), p2.masses()))
}

fn angle_from_masses(a: &[f64], b: &[f64]) -> f64 {
    let h2 = hellinger_sq_masses(a, b);
    2.0 * (h2 / 2.0).sqrt().clamp(0.0, std::f64::consts::FRAC_1_SQRT_2).asin()
}

fn nondegenerate_angle(p1: &BinnedDistribution, p2: &BinnedDistribution) -> Result<f64> {
    let theta = geodesic_angle(p1, p2)?;
    if theta == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    Ok(theta)
}

pub fn geodesic_point(
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
    phi: f64,
) -> Result<GeodesicPoint> {
    let theta = nondegenerate_angle(p1, p2)?;
    if !(0.0..=theta).contains(&phi) {
        return Err(Error::AngleOutOfRange { phi, theta });
    }
    let distribution = if phi == 0.0 {
        p1.clone()
    } else if phi == theta {
        p2.clone()
    } else {
        let s = theta.sin();
        let (c1, c2) = ((theta - phi).sin() / s, phi.sin() / s);
        combine_roots(p1, p2, c1, c2)?
    };
    Ok(GeodesicPoint {
        phi,
        theta,
        distribution,
    })
}

/// Geodesic point at a fraction `t ∈ [0, 1]` of the arc.
pub fn geodesic_fraction(
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
    t: f64,
) -> Result<GeodesicPoint> {
    let theta = nondegenerate_angle(p1, p2)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::AngleOutOfRange { phi: t * theta, theta });
    }
    geodesic_point(p1, p2, if t == 1.0 { theta } else { t * theta })
}

/// The Hellinger midpoint `u`, with `√u = (√p₁ + √p₂) / (2 cos(θ/2))`.
pub fn hellinger_midpoint(
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
) -> Result<BinnedDistribution> {
    let theta = nondegenerate_angle(p1, p2)?;
    let c = 0.5 / (theta / 2.0).cos();
    combine_roots(p1, p2, c, c)
}

fn combine_roots(
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
    c1: f64,
    c2: f64,
) -> Result<BinnedDistribution> {
    let masses = p1
        .masses()
        .iter()
        .zip(p2.masses())
        .map(|(&a, &b)| {
            let r = c1 * a.sqrt() + c2 * b.sqrt();
            r * r
        })
        .collect();
    BinnedDistribution::new(p1.support(), masses, "")
}

/// `r* = 1 − cos(θ/2)`. Coinciding endpoints give `r* = 0` with `degenerate` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRadius {
    pub radius: f64,
    pub theta: f64,
    pub degenerate: bool,
}

pub fn critical_radius(p1: &BinnedDistribution, p2: &BinnedDistribution) -> Result<CriticalRadius> {
    let theta = geodesic_angle(p1, p2)?;
    Ok(CriticalRadius {
        radius: 1.0 - (theta / 2.0).cos(),
        theta,
        degenerate: theta == 0.0,
    })
}
