//! Distances from a family member to the base pair.
//!
//! Every member of a family has the same distances to `p₁` and `p₂`: they
//! depend only on how many bins sit at each of the four density levels.
//! Writing `fᵢ = |Rᵢ|/N`, the first family has, for example,
//!
//! ```text
//! H²(p, p₁) = ¼ [ f₁ (√(1−b+a₁) − √(1−b))² + f₂ (√(1+b−a₂) − √(1+b))² ]
//! ```
//!
//! and similarly for `p₂` and for the symmetric χ² distance.

use serde::{Deserialize, Serialize};

use super::{base_pair, levels, member_from_subsets, FamilyParams, IndexSubset, Side};
use crate::divergences::DivergenceReport;
use crate::error::Result;

/// Distances from a family member to each base distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyProfile {
    pub hellinger_to_p1: f64,
    pub hellinger_to_p2: f64,
    pub chi_sq_to_p1: f64,
    pub chi_sq_to_p2: f64,
}

impl FamilyProfile {
    /// Distance to the far hypothesis over distance to the near one.
    pub fn hellinger_ratio(&self, side: Side) -> f64 {
        match side {
            Side::PerturbP1 => self.hellinger_to_p2 / self.hellinger_to_p1,
            Side::PerturbP2 => self.hellinger_to_p1 / self.hellinger_to_p2,
        }
    }

    pub fn chi_sq_ratio(&self, side: Side) -> f64 {
        match side {
            Side::PerturbP1 => self.chi_sq_to_p2 / self.chi_sq_to_p1,
            Side::PerturbP2 => self.chi_sq_to_p1 / self.chi_sq_to_p2,
        }
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.hellinger_to_p1 - other.hellinger_to_p1,
            self.hellinger_to_p2 - other.hellinger_to_p2,
            self.chi_sq_to_p1 - other.chi_sq_to_p1,
            self.chi_sq_to_p2 - other.chi_sq_to_p2,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
    }
}

/// The profile from the four-level closed form; independent of `N`.
pub fn closed_form_profile(params: &FamilyParams, side: Side) -> FamilyProfile {
    let b = params.b();
    let n = params.num_bins_half() as f64;
    let f1 = params.r1_size() as f64 / n;
    let f2 = params.r2_size() as f64 / n;
    let (f_first, f_second) = match side {
        Side::PerturbP1 => (f1, f2),
        Side::PerturbP2 => (f2, f1),
    };
    let [fi, fo, si, so] = levels(params, side);
    // (fraction of [0,1], member density, p₁ density, p₂ density)
    let groups = [
        (f_first / 2.0, fi, 1.0 - b, 1.0 + b),
        ((1.0 - f_first) / 2.0, fo, 1.0 - b, 1.0 + b),
        (f_second / 2.0, si, 1.0 + b, 1.0 - b),
        ((1.0 - f_second) / 2.0, so, 1.0 + b, 1.0 - b),
    ];
    let hellinger = |pick: fn(&(f64, f64, f64, f64)) -> f64| -> f64 {
        0.5 * groups
            .iter()
            .map(|g| g.0 * (g.1.sqrt() - pick(g).sqrt()).powi(2))
            .sum::<f64>()
    };
    let chi_sq = |pick: fn(&(f64, f64, f64, f64)) -> f64| -> f64 {
        groups
            .iter()
            .map(|g| {
                let (d, e) = (g.1, pick(g));
                if d + e > 0.0 {
                    g.0 * (d - e).powi(2) / (d + e)
                } else {
                    0.0
                }
            })
            .sum()
    };
    FamilyProfile {
        hellinger_to_p1: hellinger(|g| g.2),
        hellinger_to_p2: hellinger(|g| g.3),
        chi_sq_to_p1: chi_sq(|g| g.2),
        chi_sq_to_p2: chi_sq(|g| g.3),
    }
}

/// The profile computed on one instantiated member (`R₁`, `R₂` the leading
/// indices) with the general divergence routines over all `2N` bins.
pub fn instantiated_profile(params: &FamilyParams, side: Side) -> Result<FamilyProfile> {
    let n = params.num_bins_half();
    let r1 = IndexSubset::from_indices(n, (0..params.r1_size()).collect())?;
    let r2 = IndexSubset::from_indices(n, (0..params.r2_size()).collect())?;
    let member = member_from_subsets(params, r1, r2, side)?.distribution;
    let (p1, p2) = base_pair(params.b(), n)?;
    let to_p1 = DivergenceReport::compute(&member, &p1)?;
    let to_p2 = DivergenceReport::compute(&member, &p2)?;
    Ok(FamilyProfile {
        hellinger_to_p1: to_p1.hellinger_sq,
        hellinger_to_p2: to_p2.hellinger_sq,
        chi_sq_to_p1: to_p1.sym_chi_sq,
        chi_sq_to_p2: to_p2.sym_chi_sq,
    })
}

/// Closed form and instantiated member side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub side: Side,
    pub closed_form: FamilyProfile,
    pub instantiated: FamilyProfile,
    /// Largest absolute disagreement between the two computations.
    pub discrepancy: f64,
    pub hellinger_ratio: f64,
    pub chi_sq_ratio: f64,
}

pub fn family_distance_profile(params: &FamilyParams, side: Side) -> Result<DistanceProfile> {
    let closed_form = closed_form_profile(params, side);
    let instantiated = instantiated_profile(params, side)?;
    Ok(DistanceProfile {
        side,
        closed_form,
        instantiated,
        discrepancy: closed_form.max_abs_diff(&instantiated),
        hellinger_ratio: closed_form.hellinger_ratio(side),
        chi_sq_ratio: closed_form.chi_sq_ratio(side),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::hellinger_sq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    const LIMIT_RATIO: f64 = SQRT_2 / (SQRT_2 - 1.0);

    fn limit_h2_to_p1() -> f64 {
        0.25 * ((SQRT_2 - 1.0).powi(2) + 1.0)
    }

    #[test]
    fn limit_regime_values() {
        let params = FamilyParams::new(1.0, 1e6, 1.0, 1_000_000).unwrap();
        let p = family_distance_profile(&params, Side::PerturbP1).unwrap();
        assert!((p.closed_form.hellinger_to_p1 - limit_h2_to_p1()).abs() < 1e-12);
        assert!((p.instantiated.hellinger_to_p1 - limit_h2_to_p1()).abs() < 1e-12);
        assert!(p.discrepancy < 1e-12, "{}", p.discrepancy);
        assert!((p.hellinger_ratio - LIMIT_RATIO).abs() < 3e-3);
        assert!((p.closed_form.chi_sq_to_p1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.chi_sq_ratio - 3.0).abs() < 3e-3);
    }

    #[test]
    fn second_family_mirrors_the_first() {
        let params = FamilyParams::new(0.5, 2.0, 1.0, 8).unwrap();
        let a = closed_form_profile(&params, Side::PerturbP1);
        let b = closed_form_profile(&params, Side::PerturbP2);
        assert!((a.hellinger_to_p1 - b.hellinger_to_p2).abs() < 1e-15);
        assert!((a.hellinger_to_p2 - b.hellinger_to_p1).abs() < 1e-15);
        assert!((a.chi_sq_to_p1 - b.chi_sq_to_p2).abs() < 1e-15);
    }

    #[test]
    fn literal_closed_form_for_far_distance() {
        // at b = 1, a₂ = 1: H²(p,p₂) = ¼[2(1 − 1/a₁) + (1 − √(2/a₁))² + 1]
        for a1 in [2.0, 4.0, 10.0, 100.0] {
            let params = FamilyParams::new(1.0, a1, 1.0, 100).unwrap();
            let got = closed_form_profile(&params, Side::PerturbP1).hellinger_to_p2;
            let want = 0.25 * (2.0 * (1.0 - 1.0 / a1) + (1.0 - (2.0 / a1).sqrt()).powi(2) + 1.0);
            assert!((got - want).abs() < 1e-14, "a1 = {a1}: {got} vs {want}");
        }
    }

    #[test]
    fn ratios_approach_their_limits_monotonically() {
        let mut last_h = 0.0;
        let mut last_c = 0.0;
        for k in 2..=6 {
            let a1 = 10f64.powi(k);
            let params = FamilyParams::new(1.0, a1, 1.0, a1 as usize).unwrap();
            let p = closed_form_profile(&params, Side::PerturbP1);
            let (h, c) = (p.hellinger_ratio(Side::PerturbP1), p.chi_sq_ratio(Side::PerturbP1));
            assert!(h > last_h && h < LIMIT_RATIO, "k = {k}: {h}");
            assert!(c > last_c && c < 3.0, "k = {k}: {c}");
            last_h = h;
            last_c = c;
        }
        assert!(LIMIT_RATIO - last_h < 3e-3);
    }

    #[test]
    fn closed_form_matches_members_on_general_parameters() {
        for (b, a1, a2, n) in [(0.5, 1.0, 0.75, 6), (0.3, 0.6, 1.2, 4), (1.0, 4.0, 2.0, 8), (0.8, 0.8, 0.8, 5)] {
            let params = FamilyParams::new(b, a1, a2, n).unwrap();
            for side in Side::BOTH {
                let p = family_distance_profile(&params, side).unwrap();
                assert!(p.discrepancy < 1e-12, "{params:?} {side:?}: {}", p.discrepancy);
            }
        }
    }

    #[test]
    fn distances_identical_across_members() {
        let params = FamilyParams::new(0.5, 1.25, 1.0, 20).unwrap();
        let (p1, p2) = base_pair(0.5, 20).unwrap();
        let want = closed_form_profile(&params, Side::PerturbP1);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let r1 = IndexSubset::random(&mut rng, 20, params.r1_size());
            let r2 = IndexSubset::random(&mut rng, 20, params.r2_size());
            let side = if rng.random_bool(0.5) { Side::PerturbP1 } else { Side::PerturbP2 };
            let m = member_from_subsets(&params, r1, r2, side).unwrap().distribution;
            let (near, far) = match side {
                Side::PerturbP1 => (&p1, &p2),
                Side::PerturbP2 => (&p2, &p1),
            };
            assert!((hellinger_sq(&m, near).unwrap() - want.hellinger_to_p1).abs() < 1e-12);
            assert!((hellinger_sq(&m, far).unwrap() - want.hellinger_to_p2).abs() < 1e-12);
        }
    }
}
