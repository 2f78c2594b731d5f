//! The collision event and the bounds that turn it into an error floor.
//!
//! `E` is the event that no bin receives two samples. The mixture marginal of
//! either family is uniform on `[0, 1]`, so sample bins are uniform on `2N`
//! cells and `P(E) = ∏_{i=1}^{m−1} (1 − i/(2N))`.

use num_traits::Num;

use crate::error::{Error, Result};

/// Exact `P(E)` for `m` samples over `2·num_bins_half` equally likely bins.
pub fn collision_probability(num_bins_half: u64, m: u64) -> f64 {
    let cells = 2.0 * num_bins_half as f64;
    (1..m)
        .map(|i| (1.0 - i as f64 / cells).max(0.0))
        .product()
}

/// The heuristic `exp(−(m−1)²/N)`, reported next to the exact product.
pub fn collision_probability_approx(num_bins_half: u64, m: u64) -> f64 {
    let k = m.saturating_sub(1) as f64;
    (-(k * k) / num_bins_half as f64).exp()
}

/// `N = C·(m−1)²`, at least 1.
pub fn schedule_bins(constant: u64, m: u64) -> u64 {
    let k = m.saturating_sub(1);
    (constant * k * k).max(1)
}

/// Smallest integer `C ≥ 1` such that `P(E) ≥ target` at `N = C(m−1)²` for
/// every `m` in `sample_counts`.
pub fn minimal_collision_constant(sample_counts: &[u64], target: f64) -> Result<u64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param(format!("target probability {target} must lie in (0, 1)")));
    }
    // P(E) ≥ 1 − (m−1)m/(4N) ≥ 1 − 1/(2C) for m ≥ 2, so this C always works.
    let ceiling = (1.0 / (2.0 * (1.0 - target))).ceil() as u64 + 1;
    (1..=ceiling)
        .find(|&c| {
            sample_counts
                .iter()
                .all(|&m| collision_probability(schedule_bins(c, m), m) >= target)
        })
        .ok_or_else(|| Error::param("no collision constant found"))
}

fn check_probability<T: Num + PartialOrd + Copy>(x: T, name: &str) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in [0, 1]")))
    }
}

/// `min(1, TV(u|E, v|E) + 2u(Eᶜ) + 2v(Eᶜ))`, an upper bound on `TV(u, v)`.
///
/// Generic so the bound can be evaluated in exact rational arithmetic.
pub fn conditioning_tv_bound<T: Num + PartialOrd + Copy>(
    tv_conditional: T,
    mass_u_comp: T,
    mass_v_comp: T,
) -> Result<T> {
    check_probability(tv_conditional, "conditional total variation")?;
    check_probability(mass_u_comp, "u(E^c)")?;
    check_probability(mass_v_comp, "v(E^c)")?;
    let two = T::one() + T::one();
    let bound = tv_conditional + two * mass_u_comp + two * mass_v_comp;
    Ok(if bound > T::one() { T::one() } else { bound })
}

/// Le Cam's two-point floor `(1 − TV)/2` on the average error of any test.
///
/// In `f64`, `lecam_floor(1.0 / 3.0)` is one ulp above `1.0 / 3.0` because
/// the input is rounded down; with exact rationals the identity is exact.
pub fn lecam_floor<T: Num + PartialOrd + Copy>(tv: T) -> Result<T> {
    check_probability(tv, "total variation")?;
    Ok((T::one() - tv) / (T::one() + T::one()))
}
