//! Exact laws of the mixture products on small instances.
//!
//! Every `(R₁, R₂)` pair is enumerated, and every ordered tuple of `m`
//! distinct bins (the collision-free event `E`) is scored under the uniform
//! mixture over members.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{member_densities, FamilyParams, IndexSubset, Side};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Largest total bin count `2N` accepted by the enumeration.
pub const MAX_ENUMERATED_BINS: usize = 12;
/// Largest sample count accepted by the enumeration.
pub const MAX_ENUMERATED_SAMPLES: usize = 3;

/// Mass vectors of every member of one family.
pub fn enumerate_members(params: &FamilyParams, side: Side) -> Result<Vec<Vec<f64>>> {
    let width = params.num_bins() as f64;
    Ok(enumerate_densities(params, side)?
        .into_iter()
        .map(|d| d.into_iter().map(|x| x / width).collect())
        .collect())
}

/// Density vectors of every member. Densities take a handful of small values,
/// so sums over members stay exact far longer than sums of masses.
fn enumerate_densities(params: &FamilyParams, side: Side) -> Result<Vec<Vec<f64>>> {
    check_small(params, 1)?;
    let n = params.num_bins_half();
    let subsets = |k: usize| -> Vec<IndexSubset> {
        (0..n)
            .combinations(k)
            .map(|c| IndexSubset::from_indices(n, c).expect("combination is a valid subset"))
            .collect()
    };
    let (r1s, r2s) = (subsets(params.r1_size()), subsets(params.r2_size()));
    Ok(r1s
        .iter()
        .cartesian_product(&r2s)
        .map(|(r1, r2)| member_densities(params, r1, r2, side))
        .collect())
}

fn check_small(params: &FamilyParams, m: usize) -> Result<()> {
    if params.num_bins() > MAX_ENUMERATED_BINS || m > MAX_ENUMERATED_SAMPLES {
        return Err(Error::InstanceTooLarge(format!(
            "2N = {} and m = {m}; limits are 2N ≤ {MAX_ENUMERATED_BINS}, m ≤ {MAX_ENUMERATED_SAMPLES}",
            params.num_bins()
        )));
    }
    if m == 0 {
        return Err(Error::param("sample count must be positive"));
    }
    Ok(())
}

/// Single-sample marginal of the mixture (bin masses), by enumeration.
pub fn mixture_marginal(params: &FamilyParams, side: Side) -> Result<Vec<f64>> {
    let members = enumerate_densities(params, side)?;
    let count = members.len() as f64;
    let width = params.num_bins() as f64;
    Ok((0..params.num_bins())
        .map(|bin| compensated_sum(members.iter().map(|m| m[bin])) / count / width)
        .collect())
}

/// Unnormalized law of collision-free tuples: probability of each ordered
/// tuple of distinct bins under the mixture, in lexicographic tuple order.
fn collision_free_law(params: &FamilyParams, side: Side, m: usize) -> Result<Vec<f64>> {
    let members = enumerate_densities(params, side)?;
    let scale = members.len() as f64 * (params.num_bins() as f64).powi(m as i32);
    Ok((0..params.num_bins())
        .permutations(m)
        .map(|tuple| {
            compensated_sum(
                members
                    .iter()
                    .map(|density| tuple.iter().map(|&bin| density[bin]).product::<f64>()),
            ) / scale
        })
        .collect())
}

/// Comparison of two mixture laws conditioned on the collision-free event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLawComparison {
    pub sample_count: usize,
    /// `P(E)` under each law.
    pub collision_free_first: f64,
    pub collision_free_second: f64,
    /// Largest pointwise gap between the conditional laws.
    pub max_abs_difference: f64,
    pub total_variation: f64,
    pub tuples: usize,
    /// Whether the conditional laws agree to `1e-12` pointwise.
    pub equal: bool,
}

/// Compare the conditional laws given `E` of two (possibly different)
/// families over the same bins.
pub fn compare_conditional_laws(
    first: (&FamilyParams, Side),
    second: (&FamilyParams, Side),
    m: usize,
) -> Result<ConditionalLawComparison> {
    check_small(first.0, m)?;
    check_small(second.0, m)?;
    if first.0.num_bins_half() != second.0.num_bins_half() {
        return Err(Error::param("both families must live on the same bins"));
    }
    let a = collision_free_law(first.0, first.1, m)?;
    let b = collision_free_law(second.0, second.1, m)?;
    let (za, zb) = (compensated_sum(a.iter().copied()), compensated_sum(b.iter().copied()));
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x / za - y / zb).abs()).collect();
    let max_abs_difference = diffs.iter().copied().fold(0.0, f64::max);
    Ok(ConditionalLawComparison {
        sample_count: m,
        collision_free_first: za,
        collision_free_second: zb,
        max_abs_difference,
        total_variation: 0.5 * compensated_sum(diffs),
        tuples: a.len(),
        equal: max_abs_difference <= 1e-12,
    })
}

/// `D₁^m | E` against `D₂^m | E` for one parameter set.
pub fn conditional_equality_check(params: &FamilyParams, m: usize) -> Result<ConditionalLawComparison> {
    compare_conditional_laws((params, Side::PerturbP1), (params, Side::PerturbP2), m)
}
