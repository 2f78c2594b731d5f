//! Finite and binned probability distributions.
//!
//! A [`BinnedDistribution`] is either a mass function over `n` discrete atoms
//! or a piecewise-constant density over `n` equal-width bins of `[lo, hi)`.
//! In the binned case a density value `v` on a bin of width `w` is stored as
//! the mass `v * w`, so every integral over the density becomes a finite sum
//! over bin masses.
//!
//! Samples are atom (bin) indices. Every statistic in this crate depends on a
//! sample only through the atom it falls in.

use std::fmt;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Absolute tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Relative tolerance used when matching bin edges between two grids.
const GRID_TOL: f64 = 1e-9;

/// What the atoms of a distribution are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// Unordered discrete points `0..n`.
    Points,
    /// Equal-width bins partitioning `[lo, hi)`.
    Bins { lo: f64, hi: f64 },
}

/// Why a candidate distribution was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("support has no atoms")]
    Empty,
    #[error("non-finite mass at {index}")]
    NonFinite { index: usize },
    #[error("negative mass at {index} ({mass})")]
    NegativeMass { index: usize, mass: f64 },
    #[error("sum = {sum}")]
    NotNormalized { sum: f64 },
    #[error("interval [{lo}, {hi}) is empty or not finite")]
    BadInterval { lo: f64, hi: f64 },
}

/// Check the distribution invariants on raw parts.
///
/// Checks run in order: non-empty, interval, finiteness, sign, normalization.
/// The first failure is reported, naming the offending index where there is one.
pub fn validate(support: &Support, masses: &[f64]) -> Result<(), Violation> {
    if masses.is_empty() {
        return Err(Violation::Empty);
    }
    if let Support::Bins { lo, hi } = *support {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Violation::BadInterval { lo, hi });
        }
    }
    for (index, &mass) in masses.iter().enumerate() {
        if !mass.is_finite() {
            return Err(Violation::NonFinite { index });
        }
        if mass < 0.0 {
            return Err(Violation::NegativeMass { index, mass });
        }
    }
    let sum = compensated_sum(masses.iter().copied());
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Violation::NotNormalized { sum });
    }
    Ok(())
}

/// A validated probability distribution with finite support.
///
/// Immutable once constructed; cheap to share between threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionFile", into = "DistributionFile")]
pub struct BinnedDistribution {
    support: Support,
    masses: Vec<f64>,
    label: String,
}

impl BinnedDistribution {
    pub fn new(support: Support, masses: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        validate(&support, &masses)?;
        Ok(Self {
            support,
            masses,
            label: label.into(),
        })
    }

    /// Mass function over discrete atoms `0..masses.len()`.
    pub fn points(masses: Vec<f64>) -> Result<Self> {
        Self::new(Support::Points, masses, "")
    }

    /// Piecewise-constant density on `[lo, hi)`, given by bin masses.
    pub fn bins(lo: f64, hi: f64, masses: Vec<f64>) -> Result<Self> {
        Self::new(Support::Bins { lo, hi }, masses, "")
    }

    /// Uniform density on `[lo, hi)` split into `n` bins.
    pub fn uniform_bins(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::bins(lo, hi, vec![1.0 / n as f64; n])
    }

    /// Piecewise-constant density on `[lo, hi)` from per-bin density values.
    pub fn from_densities(lo: f64, hi: f64, densities: &[f64]) -> Result<Self> {
        let width = (hi - lo) / densities.len() as f64;
        Self::bins(lo, hi, densities.iter().map(|d| d * width).collect())
    }

    /// All mass on `atom` of an `n`-point support.
    pub fn point_mass(n: usize, atom: usize) -> Result<Self> {
        if atom >= n {
            return Err(Error::AtomOutOfRange { index: atom, len: n });
        }
        let mut masses = vec![0.0; n];
        masses[atom] = 1.0;
        Self::points(masses)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, atom: usize) -> f64 {
        self.masses[atom]
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Width of one bin, or `None` for a point support.
    pub fn bin_width(&self) -> Option<f64> {
        match self.support {
            Support::Points => None,
            Support::Bins { lo, hi } => Some((hi - lo) / self.len() as f64),
        }
    }

    /// Density value on a bin (mass divided by width). Point supports return the mass.
    pub fn density(&self, atom: usize) -> f64 {
        match self.bin_width() {
            Some(w) => self.masses[atom] / w,
            None => self.masses[atom],
        }
    }

    /// Atoms carrying positive mass.
    pub fn support_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
    }

    /// Total mass of a set of atoms given as a membership predicate.
    pub fn mass_of(&self, mut member: impl FnMut(usize) -> bool) -> f64 {
        compensated_sum(
            self.masses
                .iter()
                .enumerate()
                .filter(|(i, _)| member(*i))
                .map(|(_, &m)| m),
        )
    }

    /// True when both distributions live on the same atoms or the same grid.
    pub fn same_support(&self, other: &Self) -> bool {
        self.len() == other.len()
            && match (self.support, other.support) {
                (Support::Points, Support::Points) => true,
                (Support::Bins { lo: a, hi: b }, Support::Bins { lo: c, hi: d }) => {
                    let scale = (b - a).abs().max(1.0);
                    (a - c).abs() <= GRID_TOL * scale && (b - d).abs() <= GRID_TOL * scale
                }
                _ => false,
            }
    }

    pub(crate) fn check_aligned(&self, other: &Self) -> Result<()> {
        if self.same_support(other) {
            Ok(())
        } else {
            Err(Error::SupportMismatch(format!(
                "{} vs {}",
                describe_support(self),
                describe_support(other)
            )))
        }
    }

    /// Reusable sampler over the atoms of this distribution.
    pub fn sampler(&self) -> AtomSampler {
        AtomSampler {
            index: WeightedIndex::new(&self.masses).expect("validated masses have positive total"),
        }
    }

    /// `count` i.i.d. draws. Identical `(self, count, seed)` gives identical output.
    pub fn sample(&self, count: usize, seed: u64) -> SampleBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut atom_indices = Vec::with_capacity(count);
        self.sampler().fill(&mut rng, count, &mut atom_indices);
        SampleBatch {
            atom_indices,
            seed,
            source_label: self.label.clone(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        crate::error::from_json_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = crate::error::read_file(path)?;
        Self::from_json_str(&text).map_err(|err| match err {
            Error::Json { path: field, message } => Error::Json {
                path: format!("{}: {}", path.display(), field),
                message,
            },
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }
}

fn describe_support(d: &BinnedDistribution) -> String {
    match d.support {
        Support::Points => format!("{} points", d.len()),
        Support::Bins { lo, hi } => format!("{} bins on [{lo}, {hi})", d.len()),
    }
}

impl fmt::Display for BinnedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.label.is_empty() {
            write!(f, "{}: ", self.label)?;
        }
        write!(f, "{} {:?}", describe_support(self), self.masses)
    }
}

/// Categorical sampler over the atoms of a distribution.
#[derive(Debug, Clone)]
pub struct AtomSampler {
    index: WeightedIndex<f64>,
}

impl AtomSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }

    /// Clear `out` and fill it with `count` draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..count).map(|_| self.index.sample(rng)));
    }
}

/// A batch of i.i.d. samples, stored as atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub atom_indices: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub source_label: String,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.atom_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_indices.is_empty()
    }

    /// Fail if any index falls outside a support of `len` atoms.
    pub fn check_within(&self, len: usize) -> Result<()> {
        match self.atom_indices.iter().find(|&&i| i >= len) {
            Some(&index) => Err(Error::AtomOutOfRange { index, len }),
            None => Ok(()),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        crate::error::from_json_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = crate::error::read_file(path.as_ref())?;
        Self::from_json_str(&text)
    }
}

/// `weight * d1 + (1 - weight) * d2`, pointwise.
pub fn mixture(
    d1: &BinnedDistribution,
    d2: &BinnedDistribution,
    weight: f64,
) -> Result<BinnedDistribution> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidWeight(weight));
    }
    d1.check_aligned(d2)?;
    let masses = d1
        .masses
        .iter()
        .zip(&d2.masses)
        .map(|(a, b)| weight * a + (1.0 - weight) * b)
        .collect();
    BinnedDistribution::new(d1.support, masses, "")
}

/// Re-express two binned densities on the coarsest common refinement of
/// their grids, covering the union of both intervals.
///
/// Bin widths and the offset between the grids must have a rational ratio
/// (denominators up to 10^5); otherwise no common grid exists.
pub fn align_supports(
    d1: &BinnedDistribution,
    d2: &BinnedDistribution,
) -> Result<(BinnedDistribution, BinnedDistribution)> {
    let (Support::Bins { lo: lo1, hi: hi1 }, Support::Bins { lo: lo2, hi: hi2 }) =
        (d1.support, d2.support)
    else {
        if d1.same_support(d2) {
            return Ok((d1.clone(), d2.clone()));
        }
        return Err(Error::Incommensurable(
            "only interval-bin supports can be re-gridded".into(),
        ));
    };
    if d1.same_support(d2) {
        return Ok((d1.clone(), d2.clone()));
    }
    let w1 = (hi1 - lo1) / d1.len() as f64;
    let w2 = (hi2 - lo2) / d2.len() as f64;

    let (num, _) = rational_approx(w1 / w2).ok_or_else(|| {
        Error::Incommensurable(format!("bin widths {w1} and {w2} have no rational ratio"))
    })?;
    // w1 = num * g0 and w2 = den * g0
    let g0 = w1 / num as f64;
    let (_, offset_den) = rational_approx((lo2 - lo1) / g0).ok_or_else(|| {
        Error::Incommensurable(format!("grid offset {} is not commensurable", lo2 - lo1))
    })?;
    let width = g0 / offset_den as f64;

    let lo = lo1.min(lo2);
    let hi = hi1.max(hi2);
    let total = ((hi - lo) / width).round() as usize;
    let regrid = |d: &BinnedDistribution, dlo: f64, w: f64| -> Result<BinnedDistribution> {
        let start = ((dlo - lo) / width).round() as usize;
        let split = (w / width).round() as usize;
        let mut masses = vec![0.0; total];
        for (i, &m) in d.masses.iter().enumerate() {
            let part = m / split as f64;
            for slot in &mut masses[start + i * split..start + (i + 1) * split] {
                *slot = part;
            }
        }
        BinnedDistribution::new(Support::Bins { lo, hi }, masses, d.label.clone())
    };
    Ok((regrid(d1, lo1, w1)?, regrid(d2, lo2, w2)?))
}

/// Align any number of binned distributions onto one common grid.
pub fn align_all(dists: &[BinnedDistribution]) -> Result<Vec<BinnedDistribution>> {
    let Some(first) = dists.first() else {
        return Ok(Vec::new());
    };
    let mut reference = first.clone();
    for d in &dists[1..] {
        reference = align_supports(&reference, d)?.0;
    }
    dists
        .iter()
        .map(|d| align_supports(&reference, d).map(|(_, aligned)| aligned))
        .collect()
}

/// Best rational approximation `p/q` (q <= 10^5) of `x` via continued
/// fractions, accepted only if it matches `x` to a relative `1e-12`.
fn rational_approx(x: f64) -> Option<(i64, u64)> {
    const MAX_DEN: u64 = 100_000;
    if !x.is_finite() {
        return None;
    }
    let target = x;
    let (mut h0, mut h1) = (0_i64, 1_i64);
    let (mut k0, mut k1) = (1_u64, 0_u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = (ai as u64).checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DEN {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - target).abs() <= 1e-12 * target.abs().max(1.0) {
            return Some((h1, k1));
        }
        let frac = rest - a;
        if frac.abs() < f64::EPSILON {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// On-disk form: `{ "kind": "bins"|"points", "lo", "hi", "masses", "label" }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub kind: SupportKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportKind {
    Bins,
    Points,
}

impl TryFrom<DistributionFile> for BinnedDistribution {
    type Error = Error;

    fn try_from(file: DistributionFile) -> Result<Self> {
        let support = match file.kind {
            SupportKind::Points => Support::Points,
            SupportKind::Bins => match (file.lo, file.hi) {
                (Some(lo), Some(hi)) => Support::Bins { lo, hi },
                _ => return Err(Error::param("`bins` distributions need `lo` and `hi`")),
            },
        };
        BinnedDistribution::new(support, file.masses, file.label)
    }
}

impl From<BinnedDistribution> for DistributionFile {
    fn from(d: BinnedDistribution) -> Self {
        let (kind, lo, hi) = match d.support {
            Support::Points => (SupportKind::Points, None, None),
            Support::Bins { lo, hi } => (SupportKind::Bins, Some(lo), Some(hi)),
        };
        DistributionFile {
            kind,
            lo,
            hi,
            masses: d.masses,
            label: d.label,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_uniform_pair() {
        assert!(validate(&Support::Points, &[0.5, 0.5]).is_ok());
    }

    #[test]
    fn validate_reports_sum() {
        let err = validate(&Support::Points, &[0.6, 0.5]).unwrap_err();
        assert!(matches!(err, Violation::NotNormalized { .. }));
        assert!(err.to_string().starts_with("sum = 1.1"), "{err}");
    }

    #[test]
    fn validate_reports_negative_index() {
        let err = validate(&Support::Points, &[-0.1, 1.1]).unwrap_err();
        assert!(err.to_string().starts_with("negative mass at 0"), "{err}");
    }

    #[test]
    fn validate_rejects_bad_interval_and_empty() {
        assert_eq!(validate(&Support::Points, &[]), Err(Violation::Empty));
        assert!(matches!(
            validate(&Support::Bins { lo: 1.0, hi: 1.0 }, &[1.0]),
            Err(Violation::BadInterval { .. })
        ));
        assert!(matches!(
            validate(&Support::Points, &[f64::NAN, 1.0]),
            Err(Violation::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn point_mass_samples_only_its_atom() {
        let d = BinnedDistribution::point_mass(5, 3).unwrap();
        assert_eq!(d.sample(5, 123).atom_indices, vec![3, 3, 3, 3, 3]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = BinnedDistribution::points(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(d.sample(1000, 9), d.sample(1000, 9));
        assert_ne!(d.sample(1000, 9), d.sample(1000, 10));
    }

    #[test]
    fn uniform_frequencies_converge() {
        let d = BinnedDistribution::points(vec![0.25; 4]).unwrap();
        let batch = d.sample(1_000_000, 1);
        let mut counts = [0usize; 4];
        for &i in &batch.atom_indices {
            counts[i] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1e6 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn bernoulli_frequency_within_three_sigma() {
        let d = BinnedDistribution::points(vec![0.9, 0.1]).unwrap();
        let batch = d.sample(100_000, 7);
        let zeros = batch.atom_indices.iter().filter(|&&i| i == 0).count();
        let frac = zeros as f64 / 1e5;
        assert!((0.894..=0.906).contains(&frac), "{frac}");
    }

    #[test]
    fn frequencies_within_four_sigma_for_skewed_law() {
        let masses = vec![0.5, 0.3, 0.15, 0.04, 0.01];
        let d = BinnedDistribution::points(masses.clone()).unwrap();
        let n = 1_000_000;
        let batch = d.sample(n, 2024);
        let mut counts = vec![0usize; masses.len()];
        for &i in &batch.atom_indices {
            counts[i] += 1;
        }
        for (m, c) in masses.iter().zip(counts) {
            let bound = 4.0 * (m * (1.0 - m) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - m).abs() <= bound);
        }
    }

    #[test]
    fn mixture_examples() {
        let p = BinnedDistribution::points(vec![0.2, 0.8]).unwrap();
        assert_eq!(mixture(&p, &p, 0.5).unwrap().masses(), p.masses());
        let a = BinnedDistribution::points(vec![1.0, 0.0]).unwrap();
        let b = BinnedDistribution::points(vec![0.0, 1.0]).unwrap();
        assert_eq!(mixture(&a, &b, 0.5).unwrap().masses(), &[0.5, 0.5]);
        assert!(matches!(mixture(&a, &b, 1.5), Err(Error::InvalidWeight(_))));
        let c = BinnedDistribution::points(vec![0.5, 0.25, 0.25]).unwrap();
        assert!(matches!(mixture(&a, &c, 0.5), Err(Error::SupportMismatch(_))));
    }

    #[test]
    fn mixture_of_shifted_uniforms_averages_pointwise() {
        let eps = 0.25;
        let p1 = BinnedDistribution::uniform_bins(-1.0, 1.0, 1).unwrap();
        let p2 = BinnedDistribution::uniform_bins(eps, 1.0 + eps, 1).unwrap();
        let (a, b) = align_supports(&p1, &p2).unwrap();
        let m = mixture(&a, &b, 0.5).unwrap();
        for i in 0..m.len() {
            assert_eq!(m.mass(i), 0.5 * a.mass(i) + 0.5 * b.mass(i));
        }
    }

    #[test]
    fn align_refines_to_finer_grid() {
        let a = BinnedDistribution::uniform_bins(0.0, 1.0, 2).unwrap();
        let b = BinnedDistribution::uniform_bins(0.0, 1.0, 4).unwrap();
        let (a2, b2) = align_supports(&a, &b).unwrap();
        assert_eq!(a2.len(), 4);
        assert_eq!(a2.masses(), &[0.25; 4]);
        assert_eq!(b2.masses(), b.masses());
    }

    #[test]
    fn align_covers_union_of_intervals() {
        let a = BinnedDistribution::uniform_bins(-1.0, 1.0, 1).unwrap();
        let b = BinnedDistribution::uniform_bins(0.0, 1.0, 1).unwrap();
        let (a2, b2) = align_supports(&a, &b).unwrap();
        assert_eq!(a2.support(), Support::Bins { lo: -1.0, hi: 1.0 });
        assert_eq!(a2.masses(), &[0.5, 0.5]);
        assert_eq!(b2.masses(), &[0.0, 1.0]);
    }

    #[test]
    fn align_shifted_quarter_grid() {
        let a = BinnedDistribution::uniform_bins(0.0, 1.0, 4).unwrap();
        let b = BinnedDistribution::uniform_bins(0.25, 1.25, 4).unwrap();
        let (a2, b2) = align_supports(&a, &b).unwrap();
        assert_eq!(a2.support(), Support::Bins { lo: 0.0, hi: 1.25 });
        assert_eq!(a2.masses(), &[0.25, 0.25, 0.25, 0.25, 0.0]);
        assert_eq!(b2.masses(), &[0.0, 0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn align_rejects_incommensurable_grids() {
        let a = BinnedDistribution::uniform_bins(0.0, 1.0, 1).unwrap();
        let b = BinnedDistribution::uniform_bins(0.0, std::f64::consts::PI, 1).unwrap();
        assert!(matches!(align_supports(&a, &b), Err(Error::Incommensurable(_))));
        let p = BinnedDistribution::points(vec![1.0]).unwrap();
        assert!(matches!(align_supports(&a, &p), Err(Error::Incommensurable(_))));
    }

    #[test]
    fn align_all_puts_three_uniforms_on_one_grid() {
        let eps = 0.01;
        let ds = [
            BinnedDistribution::uniform_bins(-1.0, 1.0, 1).unwrap(),
            BinnedDistribution::uniform_bins(eps, 1.0 + eps, 1).unwrap(),
            BinnedDistribution::uniform_bins(0.0, 1.0, 1).unwrap(),
        ];
        let aligned = align_all(&ds).unwrap();
        assert_eq!(aligned[0].len(), 201);
        assert!(aligned[0].same_support(&aligned[1]) && aligned[1].same_support(&aligned[2]));
        // unif[0,1] puts 1/100 on each of the 100 bins starting at 0.
        assert_eq!(aligned[2].support_atoms().count(), 100);
        assert_eq!(aligned[2].support_atoms().next(), Some(100));
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let d = BinnedDistribution::bins(0.0, 2.0, vec![0.25, 0.75])
            .unwrap()
            .with_label("p1");
        let back = BinnedDistribution::from_json_str(&d.to_json_string()).unwrap();
        assert_eq!(back, d);

        let p = BinnedDistribution::points(vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(BinnedDistribution::from_json_str(&p.to_json_string()).unwrap(), p);

        let err = BinnedDistribution::from_json_str(r#"{"kind":"points","masses":[0.6,0.5]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("sum = 1.1"), "{err}");
        let err = BinnedDistribution::from_json_str(r#"{"kind":"points","masses":"x"}"#)
            .unwrap_err();
        assert!(err.to_string().contains("masses"), "{err}");
        let err = BinnedDistribution::from_json_str(r#"{"kind":"bins","masses":[1.0]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("lo"), "{err}");
    }

    fn arb_masses() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..20).prop_filter_map("positive total", |w| {
            let total: f64 = w.iter().sum();
            (total > 1e-3).then(|| w.iter().map(|x| x / total).collect())
        })
    }

    proptest! {
        #[test]
        fn mixture_stays_normalized(a in arb_masses(), w in 0.0f64..=1.0, seed in any::<u64>()) {
            let n = a.len();
            let d1 = BinnedDistribution::points(a).unwrap();
            let mut b: Vec<f64> = (0..n).map(|i| ((seed >> (i % 64)) & 0xff) as f64 + 1.0).collect();
            let t: f64 = b.iter().sum();
            b.iter_mut().for_each(|x| *x /= t);
            let d2 = BinnedDistribution::points(b).unwrap();
            let m = mixture(&d1, &d2, w).unwrap();
            prop_assert!((compensated_sum(m.masses().iter().copied()) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn align_preserves_mass_per_original_bin(
            a in arb_masses(), b in arb_masses(), shift in 0i32..8, quarter in any::<bool>()
        ) {
            // grids: a has width 1, b has width 1/2 or 1/4, shifted by whole units of its width
            let div = if quarter { 4.0 } else { 2.0 };
            let da = BinnedDistribution::bins(0.0, a.len() as f64, a.clone()).unwrap();
            let lo = shift as f64 / div;
            let db = BinnedDistribution::bins(lo, lo + b.len() as f64 / div, b.clone()).unwrap();
            let (ra, rb) = align_supports(&da, &db).unwrap();
            let width = ra.bin_width().unwrap();
            prop_assert!((width - 1.0 / div).abs() < 1e-12);
            let split = div as usize;
            let Support::Bins { lo: glo, .. } = ra.support() else { unreachable!() };
            let start = ((0.0 - glo) / width).round() as usize;
            for (i, &m) in a.iter().enumerate() {
                let s = compensated_sum(ra.masses()[start + i * split..start + (i + 1) * split].iter().copied());
                prop_assert!((s - m).abs() <= 4.0 * f64::EPSILON * m.max(f64::MIN_POSITIVE));
            }
            let startb = ((lo - glo) / width).round() as usize;
            prop_assert_eq!(&rb.masses()[startb..startb + b.len()], &b[..]);
        }
    }
}
