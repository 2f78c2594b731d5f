//! The perturbed two-family construction behind the lower bound on the slack
//! factor.
//!
//! The base pair lives on `[0, 1]` split into `2N` equal bins `I_0 … I_{2N−1}`:
//! `p₁` has density `1 − b` on the first half and `1 + b` on the second, `p₂`
//! is its mirror. A member of the first family perturbs `p₁`: it adds `a₁`
//! to the density on the first-half bins indexed by `R₁` and removes `a₂` on
//! the second-half bins indexed by `R₂`, with `|R₁| = (b/a₁)N` and
//! `|R₂| = (b/a₂)N` so that exactly `b/2` mass moves. Members of the second
//! family perturb `p₂` the same way with the halves exchanged: bin `j` of the
//! first half is lowered when `j ∈ R₂`, bin `N + j` is raised when `j ∈ R₁`.
//!
//! Subset indices are 0-based throughout.

mod collision;
mod enumeration;
mod experiment;
mod profile;

pub use collision::{
    collision_probability, collision_probability_approx, conditioning_tv_bound, lecam_floor,
    minimal_collision_constant, schedule_bins,
};
pub use enumeration::{
    compare_conditional_laws, conditional_equality_check, enumerate_members, mixture_marginal,
    ConditionalLawComparison, MAX_ENUMERATED_BINS, MAX_ENUMERATED_SAMPLES,
};
pub use experiment::{
    indistinguishability_experiment, indistinguishability_experiment_with,
    IndistinguishabilityEstimate, MixtureProduct,
};
pub use profile::{
    closed_form_profile, family_distance_profile, instantiated_profile, DistanceProfile,
    FamilyProfile,
};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{BinnedDistribution, Support};
use crate::error::{Error, Result};

/// Relative slack when checking that `(b/a)·N` is an integer.
const SIZE_TOL: f64 = 1e-9;

/// Parameters of the construction. Subset sizes are exact integers by
/// construction; parameter choices that would need rounding are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    b: f64,
    a1: f64,
    a2: f64,
    num_bins_half: usize,
    r1_size: usize,
    r2_size: usize,
}

impl FamilyParams {
    pub fn new(b: f64, a1: f64, a2: f64, num_bins_half: usize) -> Result<Self> {
        check_ranges(b, a1, a2)?;
        if num_bins_half == 0 {
            return Err(Error::param("the number of bins per half must be positive"));
        }
        let r1_size = exact_size(b / a1, num_bins_half, "R1")?;
        let r2_size = exact_size(b / a2, num_bins_half, "R2")?;
        Ok(Self {
            b,
            a1,
            a2,
            num_bins_half,
            r1_size,
            r2_size,
        })
    }

    /// Smallest `N ≥ at_least` for which both subset sizes are integers,
    /// searching up to `2·at_least + 10⁶`.
    pub fn with_min_bins(b: f64, a1: f64, a2: f64, at_least: usize) -> Result<Self> {
        check_ranges(b, a1, a2)?;
        let start = at_least.max(1);
        let limit = start.saturating_mul(2).saturating_add(1_000_000);
        (start..=limit)
            .find_map(|n| Self::new(b, a1, a2, n).ok())
            .ok_or_else(|| {
                Error::param(format!(
                    "no N in {start}..={limit} makes (b/a1)N and (b/a2)N integers"
                ))
            })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// `N`: bins per half, `2N` bins in total.
    pub fn num_bins_half(&self) -> usize {
        self.num_bins_half
    }

    pub fn num_bins(&self) -> usize {
        2 * self.num_bins_half
    }

    pub fn r1_size(&self) -> usize {
        self.r1_size
    }

    pub fn r2_size(&self) -> usize {
        self.r2_size
    }
}

fn check_ranges(b: f64, a1: f64, a2: f64) -> Result<()> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::param(format!("b = {b} must lie in (0, 1]")));
    }
    if !(a1.is_finite() && a1 >= b) {
        return Err(Error::param(format!("a1 = {a1} must be finite and at least b = {b}")));
    }
    if !(a2 >= b && a2 <= 1.0 + b) {
        return Err(Error::param(format!(
            "a2 = {a2} must lie in [b, 1 + b] = [{b}, {}]",
            1.0 + b
        )));
    }
    Ok(())
}

fn exact_size(fraction: f64, n: usize, name: &str) -> Result<usize> {
    let x = fraction * n as f64;
    let r = x.round();
    if r < 1.0 || (x - r).abs() > SIZE_TOL * x.max(1.0) {
        return Err(Error::param(format!(
            "|{name}| = {x} is not an integer for N = {n}"
        )));
    }
    Ok(r as usize)
}

/// Which base distribution a member perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    PerturbP1,
    PerturbP2,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::PerturbP1, Side::PerturbP2];

    /// The hypothesis a member of this family is closer to.
    pub fn hypothesis(self) -> crate::decision::Verdict {
        match self {
            Side::PerturbP1 => crate::decision::Verdict::H0,
            Side::PerturbP2 => crate::decision::Verdict::H1,
        }
    }
}

/// `(p₁, p₂)` on `2·num_bins_half` equal bins of `[0, 1]`.
pub fn base_pair(b: f64, num_bins_half: usize) -> Result<(BinnedDistribution, BinnedDistribution)> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::param(format!("b = {b} must lie in (0, 1]")));
    }
    if num_bins_half == 0 {
        return Err(Error::param("the number of bins per half must be positive"));
    }
    let n = num_bins_half;
    let lo = (1.0 - b) / (2 * n) as f64;
    let hi = (1.0 + b) / (2 * n) as f64;
    let half = |first: f64, second: f64| -> Vec<f64> {
        let mut m = vec![first; 2 * n];
        m[n..].fill(second);
        m
    };
    Ok((
        BinnedDistribution::new(Support::Bins { lo: 0.0, hi: 1.0 }, half(lo, hi), "p1")?,
        BinnedDistribution::new(Support::Bins { lo: 0.0, hi: 1.0 }, half(hi, lo), "p2")?,
    ))
}

/// A subset of `{0, …, universe − 1}`, stored as whichever of the set and
/// its complement is smaller (sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSubset {
    universe: usize,
    stored: Vec<usize>,
    complement: bool,
}

impl IndexSubset {
    pub fn from_indices(universe: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&bad) = indices.iter().find(|&&i| i >= universe) {
            return Err(Error::param(format!("subset index {bad} outside 0..{universe}")));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("subset indices must be distinct"));
        }
        if 2 * indices.len() > universe {
            let stored = complement_of(universe, &indices);
            return Ok(Self { universe, stored, complement: true });
        }
        Ok(Self { universe, stored: indices, complement: false })
    }

    /// Uniformly random subset of the given size.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, universe: usize, size: usize) -> Self {
        assert!(size <= universe, "subset larger than its universe");
        let complement = 2 * size > universe;
        let count = if complement { universe - size } else { size };
        let mut stored = rand::seq::index::sample(rng, universe, count).into_vec();
        stored.sort_unstable();
        Self { universe, stored, complement }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        if self.complement {
            self.universe - self.stored.len()
        } else {
            self.stored.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.universe && (self.stored.binary_search(&j).is_ok() != self.complement)
    }

    /// The `i`-th smallest member (`i < len`).
    pub fn nth_member(&self, i: usize) -> usize {
        if self.complement {
            nth_absent(&self.stored, i)
        } else {
            self.stored[i]
        }
    }

    /// The `i`-th smallest non-member (`i < universe − len`).
    pub fn nth_non_member(&self, i: usize) -> usize {
        if self.complement {
            self.stored[i]
        } else {
            nth_absent(&self.stored, i)
        }
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(|&j| self.contains(j))
    }
}

fn complement_of(universe: usize, sorted: &[usize]) -> Vec<usize> {
    (0..universe).filter(|j| sorted.binary_search(j).is_err()).collect()
}

/// The `i`-th smallest natural number not in `sorted`.
fn nth_absent(sorted: &[usize], i: usize) -> usize {
    // `sorted[k] − k` numbers are missing below `sorted[k]`; find the first
    // stored value with more than `i` gaps before it.
    let (mut lo, mut hi) = (0, sorted.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if sorted[mid] - mid <= i {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    i + lo
}

/// The four density levels of a member, as `(first_half_in, first_half_out,
/// second_half_in, second_half_out)` with the subset governing each half.
fn levels(params: &FamilyParams, side: Side) -> [f64; 4] {
    let FamilyParams { b, a1, a2, .. } = *params;
    match side {
        Side::PerturbP1 => [1.0 - b + a1, 1.0 - b, 1.0 + b - a2, 1.0 + b],
        Side::PerturbP2 => [1.0 + b - a2, 1.0 + b, 1.0 - b + a1, 1.0 - b],
    }
}

/// One member of either family.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedMember {
    pub r1: IndexSubset,
    pub r2: IndexSubset,
    pub side: Side,
    pub distribution: BinnedDistribution,
}

/// Build the member indexed by `(r1, r2)`; indices are 0-based in `0..N`.
pub fn make_member(
    params: &FamilyParams,
    r1: &[usize],
    r2: &[usize],
    side: Side,
) -> Result<PerturbedMember> {
    let n = params.num_bins_half;
    let r1 = IndexSubset::from_indices(n, r1.to_vec())?;
    let r2 = IndexSubset::from_indices(n, r2.to_vec())?;
    member_from_subsets(params, r1, r2, side)
}

pub(crate) fn member_from_subsets(
    params: &FamilyParams,
    r1: IndexSubset,
    r2: IndexSubset,
    side: Side,
) -> Result<PerturbedMember> {
    let n = params.num_bins_half;
    if r1.universe() != n || r2.universe() != n {
        return Err(Error::param(format!("subsets must be drawn from 0..{n}")));
    }
    if r1.len() != params.r1_size || r2.len() != params.r2_size {
        return Err(Error::param(format!(
            "subset sizes ({}, {}) differ from the required ({}, {})",
            r1.len(),
            r2.len(),
            params.r1_size,
            params.r2_size
        )));
    }
    let masses = member_masses(params, &r1, &r2, side);
    let distribution = BinnedDistribution::new(Support::Bins { lo: 0.0, hi: 1.0 }, masses, "")?;
    Ok(PerturbedMember { r1, r2, side, distribution })
}

pub(crate) fn member_masses(
    params: &FamilyParams,
    r1: &IndexSubset,
    r2: &IndexSubset,
    side: Side,
) -> Vec<f64> {
    let width = params.num_bins() as f64;
    let mut masses = member_densities(params, r1, r2, side);
    for x in &mut masses {
        *x /= width;
    }
    masses
}

/// Per-bin densities of a member (mass times `2N`).
pub(crate) fn member_densities(
    params: &FamilyParams,
    r1: &IndexSubset,
    r2: &IndexSubset,
    side: Side,
) -> Vec<f64> {
    let n = params.num_bins_half;
    let [fi, fo, si, so] = levels(params, side);
    let (first, second) = match side {
        Side::PerturbP1 => (r1, r2),
        Side::PerturbP2 => (r2, r1),
    };
    let mut densities = Vec::with_capacity(2 * n);
    densities.extend((0..n).map(|j| if first.contains(j) { fi } else { fo }));
    densities.extend((0..n).map(|j| if second.contains(j) { si } else { so }));
    densities
}

/// Draws from one member without materializing its `2N` masses: pick one
/// of the four density groups by mass, then a uniform bin inside it.
#[derive(Debug, Clone)]
pub struct MemberSampler {
    n: usize,
    first: IndexSubset,
    second: IndexSubset,
    groups: WeightedIndex<f64>,
}

impl MemberSampler {
    pub fn new(params: &FamilyParams, r1: IndexSubset, r2: IndexSubset, side: Side) -> Self {
        let n = params.num_bins_half;
        let (first, second) = match side {
            Side::PerturbP1 => (r1, r2),
            Side::PerturbP2 => (r2, r1),
        };
        let [fi, fo, si, so] = levels(params, side);
        let (k1, k2) = (first.len() as f64, second.len() as f64);
        let nf = n as f64;
        let weights = [fi * k1, fo * (nf - k1), si * k2, so * (nf - k2)];
        Self {
            n,
            first,
            second,
            groups: WeightedIndex::new(weights).expect("member has positive mass"),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let n = self.n;
        match self.groups.sample(rng) {
            0 => self.first.nth_member(rng.random_range(0..self.first.len())),
            1 => self.first.nth_non_member(rng.random_range(0..n - self.first.len())),
            2 => n + self.second.nth_member(rng.random_range(0..self.second.len())),
            _ => n + self.second.nth_non_member(rng.random_range(0..n - self.second.len())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{hellinger_sq, tv};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_validation() {
        assert!(FamilyParams::new(1.0, 2.0, 1.0, 2).is_ok());
        assert!(FamilyParams::new(0.0, 2.0, 1.0, 2).is_err());
        assert!(FamilyParams::new(1.5, 2.0, 1.0, 2).is_err());
        assert!(FamilyParams::new(0.5, 0.4, 1.0, 2).is_err());
        assert!(FamilyParams::new(0.5, 1.0, 1.6, 2).is_err());
        // (1/3)·4 is not an integer
        assert!(FamilyParams::new(1.0, 3.0, 1.0, 4).is_err());
        let p = FamilyParams::new(1.0, 49.0, 1.0, 4 * 49 * 49).unwrap();
        assert_eq!((p.r1_size(), p.r2_size()), (4 * 49, 4 * 49 * 49));
    }

    #[test]
    fn min_bins_search() {
        let p = FamilyParams::with_min_bins(1.0, 3.0, 1.0, 10).unwrap();
        assert_eq!(p.num_bins_half(), 12);
        assert!(FamilyParams::with_min_bins(2.0, 3.0, 1.0, 10).is_err());
    }

    #[test]
    fn base_pair_examples() {
        let (p1, p2) = base_pair(1.0, 3).unwrap();
        assert!((hellinger_sq(&p1, &p2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(p1.density(0), 0.0);
        assert!((p1.density(5) - 2.0).abs() < 1e-15);
        let (p1, p2) = base_pair(0.5, 5).unwrap();
        assert!((hellinger_sq(&p1, &p2).unwrap() - (1.0 - 0.75f64.sqrt())).abs() < 1e-12);
        assert!((tv(&p1, &p2).unwrap() - 0.5).abs() < 1e-12);
        assert!(base_pair(0.0, 3).is_err());
    }

    #[test]
    fn member_example() {
        let params = FamilyParams::new(1.0, 2.0, 1.0, 2).unwrap();
        // indices {1} and {1, 2} in 1-based form
        let m = make_member(&params, &[0], &[0, 1], Side::PerturbP1).unwrap();
        assert_eq!(m.distribution.masses(), &[0.5, 0.0, 0.25, 0.25]);
        let mirrored = make_member(&params, &[0], &[0, 1], Side::PerturbP2).unwrap();
        assert_eq!(mirrored.distribution.masses(), &[0.25, 0.25, 0.5, 0.0]);
        assert!(make_member(&params, &[0, 1], &[0, 1], Side::PerturbP1).is_err());
        assert!(make_member(&params, &[2], &[0, 1], Side::PerturbP1).is_err());
        assert!(make_member(&params, &[0], &[0, 0], Side::PerturbP1).is_err());
    }

    #[test]
    fn mass_moved_is_half_b() {
        let params = FamilyParams::new(0.5, 1.25, 1.0, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (p1, p2) = base_pair(0.5, 10).unwrap();
        for side in Side::BOTH {
            let r1 = IndexSubset::random(&mut rng, 10, params.r1_size());
            let r2 = IndexSubset::random(&mut rng, 10, params.r2_size());
            let m = member_from_subsets(&params, r1, r2, side).unwrap().distribution;
            let base = if side == Side::PerturbP1 { &p1 } else { &p2 };
            let added: f64 = m.masses().iter().zip(base.masses()).map(|(x, y)| (x - y).max(0.0)).sum();
            let removed: f64 = m.masses().iter().zip(base.masses()).map(|(x, y)| (y - x).max(0.0)).sum();
            assert!((added - 0.25).abs() < 1e-12 && (removed - 0.25).abs() < 1e-12);
            assert!((m.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subset_rank_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let k = rng.random_range(0..=n);
            let s = IndexSubset::random(&mut rng, n, k);
            assert_eq!(s.len(), k);
            let members: Vec<usize> = (0..n).filter(|&j| s.contains(j)).collect();
            let others: Vec<usize> = (0..n).filter(|&j| !s.contains(j)).collect();
            assert_eq!(members.len(), k);
            for (i, &x) in members.iter().enumerate() {
                assert_eq!(s.nth_member(i), x);
            }
            for (i, &x) in others.iter().enumerate() {
                assert_eq!(s.nth_non_member(i), x);
            }
            let rebuilt = IndexSubset::from_indices(n, members.clone()).unwrap();
            assert_eq!(rebuilt.members().collect::<Vec<_>>(), members);
        }
    }

    #[test]
    fn member_sampler_matches_materialized_member() {
        let params = FamilyParams::new(0.5, 1.0, 0.75, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for side in Side::BOTH {
            let r1 = IndexSubset::random(&mut rng, 6, params.r1_size());
            let r2 = IndexSubset::random(&mut rng, 6, params.r2_size());
            let member = member_from_subsets(&params, r1.clone(), r2.clone(), side).unwrap();
            let sampler = MemberSampler::new(&params, r1, r2, side);
            let n = 200_000;
            let mut counts = [0usize; 12];
            for _ in 0..n {
                counts[sampler.draw(&mut rng)] += 1;
            }
            for (i, &c) in counts.iter().enumerate() {
                let p = member.distribution.mass(i);
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!((c as f64 / n as f64 - p).abs() <= 5.0 * se + 1e-12, "bin {i}");
            }
        }
    }
}
