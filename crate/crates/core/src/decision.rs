//! Robust two-hypothesis tests.
//!
//! Every test maps a sample batch to `H0` (closer to `p₁`) or `H1` (closer to
//! `p₂`). Statistics are oriented so that `H0` is declared iff the statistic
//! is `≥ 0`; a statistic exactly at zero is a tie and resolves to `H0`.
//!
//! | family       | statistic                                                    |
//! |--------------|--------------------------------------------------------------|
//! | ML           | `Σ log p₁(Xᵢ) − Σ log p₂(Xᵢ)`                                |
//! | Scheffé      | `|p₂(A) − μ(A)| − |p₁(A) − μ(A)|`, `A = {p₁ > p₂}`          |
//! | Baraud       | `(1/n) Σ [√(p₁/q) − √(p₂/q)](Xᵢ) + H²(p₂,q) − H²(p₁,q)`, `q = (p₁+p₂)/2` |
//! | disjoint     | `(1/n) Σ 1[Xᵢ ∈ S₁] − 1[Xᵢ ∈ S₂]`                            |
//! | midpoint     | `Σ [√(p₁/u) − √(p₂/u)](Xᵢ)`, `u` the Hellinger midpoint     |
//!
//! Summands at atoms where the reference measure (`q` or `u`) vanishes are 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{BinnedDistribution, SampleBatch};
use crate::divergences::hellinger_sq_masses;
use crate::error::{Error, Result};
use crate::geodesic::hellinger_midpoint;
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    H0,
    H1,
}

impl Verdict {
    pub fn flipped(self) -> Self {
        match self {
            Verdict::H0 => Verdict::H1,
            Verdict::H1 => Verdict::H0,
        }
    }
}

/// Outcome of one test on one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub verdict: Verdict,
    #[serde(with = "crate::serde_float")]
    pub statistic_value: f64,
    pub tie_broken: bool,
}

impl TestDecision {
    /// Threshold rule shared by every family: `H0` iff `statistic ≥ 0`.
    pub fn from_statistic(statistic_value: f64) -> Self {
        let tie_broken = statistic_value == 0.0;
        let verdict = if statistic_value >= 0.0 {
            Verdict::H0
        } else {
            Verdict::H1
        };
        Self {
            verdict,
            statistic_value,
            tie_broken,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestFamily {
    #[serde(rename = "ml")]
    MaximumLikelihood,
    #[serde(rename = "scheffe")]
    Scheffe,
    #[serde(rename = "baraud")]
    Baraud,
    #[serde(rename = "disjoint")]
    DisjointSupport,
    #[serde(rename = "midpoint")]
    HellingerMidpoint,
}

impl TestFamily {
    pub const ALL: [TestFamily; 5] = [
        TestFamily::MaximumLikelihood,
        TestFamily::Scheffe,
        TestFamily::Baraud,
        TestFamily::DisjointSupport,
        TestFamily::HellingerMidpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestFamily::MaximumLikelihood => "ml",
            TestFamily::Scheffe => "scheffe",
            TestFamily::Baraud => "baraud",
            TestFamily::DisjointSupport => "disjoint",
            TestFamily::HellingerMidpoint => "midpoint",
        }
    }
}

impl fmt::Display for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param(format!("unknown test family `{s}`")))
    }
}

/// A test family together with the model class `{p₁, p₂}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSpec {
    family: TestFamily,
    p1: BinnedDistribution,
    p2: BinnedDistribution,
}

impl TestSpec {
    pub fn new(family: TestFamily, p1: BinnedDistribution, p2: BinnedDistribution) -> Result<Self> {
        p1.check_aligned(&p2)?;
        match family {
            TestFamily::DisjointSupport => {
                if let Some(i) = (0..p1.len()).find(|&i| p1.mass(i) > 0.0 && p2.mass(i) > 0.0) {
                    return Err(Error::OverlappingSupports(i));
                }
            }
            TestFamily::HellingerMidpoint if hellinger_sq_masses(p1.masses(), p2.masses()) == 0.0 => {
                return Err(Error::DegenerateGeodesic);
            }
            _ => {}
        }
        Ok(Self { family, p1, p2 })
    }

    pub fn family(&self) -> TestFamily {
        self.family
    }

    pub fn p1(&self) -> &BinnedDistribution {
        &self.p1
    }

    pub fn p2(&self) -> &BinnedDistribution {
        &self.p2
    }

    /// The same test with the hypotheses exchanged.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.family, self.p2.clone(), self.p1.clone())
    }

    /// Precompute per-atom tables so that each decision costs O(n).
    pub fn prepare(&self) -> Result<PreparedTest> {
        PreparedTest::new(self)
    }
}

/// A decision procedure over atom-index samples.
pub trait RobustTest: Sync {
    fn name(&self) -> &str;

    /// Decide on a batch. Indices must lie inside the support.
    fn decide(&self, atoms: &[usize]) -> TestDecision;
}

/// Declares the same hypothesis regardless of the data.
#[derive(Debug, Clone, Copy)]
pub struct ConstantTest(pub Verdict);

impl RobustTest for ConstantTest {
    fn name(&self) -> &str {
        match self.0 {
            Verdict::H0 => "constant-h0",
            Verdict::H1 => "constant-h1",
        }
    }

    fn decide(&self, _atoms: &[usize]) -> TestDecision {
        let statistic_value = match self.0 {
            Verdict::H0 => 1.0,
            Verdict::H1 => -1.0,
        };
        TestDecision::from_statistic(statistic_value)
    }
}

#[derive(Debug, Clone)]
enum Rule {
    /// Log-likelihoods per hypothesis (`-inf` where the mass is zero).
    LogLikelihood { log_p1: Vec<f64>, log_p2: Vec<f64> },
    /// Scheffé set membership and the two model masses of that set.
    Scheffe { in_a: Vec<bool>, p1_a: f64, p2_a: f64 },
    /// Sum of per-atom scores, optionally averaged, plus a constant.
    Additive { scores: Vec<f64>, offset: f64, average: bool },
}

/// A [`TestSpec`] with its per-atom tables computed.
#[derive(Debug, Clone)]
pub struct PreparedTest {
    family: TestFamily,
    len: usize,
    rule: Rule,
}

impl PreparedTest {
    fn new(spec: &TestSpec) -> Result<Self> {
        let (a, b) = (spec.p1.masses(), spec.p2.masses());
        let rule = match spec.family {
            TestFamily::MaximumLikelihood => Rule::LogLikelihood {
                log_p1: a.iter().map(|x| x.ln()).collect(),
                log_p2: b.iter().map(|x| x.ln()).collect(),
            },
            TestFamily::Scheffe => {
                let in_a: Vec<bool> = a.iter().zip(b).map(|(x, y)| x > y).collect();
                let p1_a = spec.p1.mass_of(|i| in_a[i]);
                let p2_a = spec.p2.mass_of(|i| in_a[i]);
                Rule::Scheffe { in_a, p1_a, p2_a }
            }
            TestFamily::Baraud => {
                let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
                Rule::Additive {
                    scores: root_ratio_scores(a, b, &q),
                    offset: hellinger_sq_masses(b, &q) - hellinger_sq_masses(a, &q),
                    average: true,
                }
            }
            TestFamily::DisjointSupport => Rule::Additive {
                scores: a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| match (x > 0.0, y > 0.0) {
                        (true, _) => 1.0,
                        (false, true) => -1.0,
                        _ => 0.0,
                    })
                    .collect(),
                offset: 0.0,
                average: true,
            },
            TestFamily::HellingerMidpoint => {
                let u = hellinger_midpoint(&spec.p1, &spec.p2)?;
                Rule::Additive {
                    scores: root_ratio_scores(a, b, u.masses()),
                    offset: 0.0,
                    average: false,
                }
            }
        };
        Ok(Self {
            family: spec.family,
            len: a.len(),
            rule,
        })
    }

    pub fn family(&self) -> TestFamily {
        self.family
    }

    /// Decide on a batch after checking its indices against the support.
    pub fn decide_batch(&self, batch: &SampleBatch) -> Result<TestDecision> {
        batch.check_within(self.len)?;
        Ok(self.decide(&batch.atom_indices))
    }

    /// The per-atom score used by additive statistics (`None` for ML and Scheffé).
    pub fn scores(&self) -> Option<&[f64]> {
        match &self.rule {
            Rule::Additive { scores, .. } => Some(scores),
            _ => None,
        }
    }
}

/// `√(a/r) − √(b/r)` per atom, zero where `r` vanishes.
fn root_ratio_scores(a: &[f64], b: &[f64], reference: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .zip(reference)
        .map(|((&x, &y), &r)| {
            if r > 0.0 {
                (x / r).sqrt() - (y / r).sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

impl RobustTest for PreparedTest {
    fn name(&self) -> &str {
        self.family.name()
    }

    fn decide(&self, atoms: &[usize]) -> TestDecision {
        match &self.rule {
            Rule::LogLikelihood { log_p1, log_p2 } => {
                let l1: f64 = atoms.iter().map(|&i| log_p1[i]).sum();
                let l2: f64 = atoms.iter().map(|&i| log_p2[i]).sum();
                if l1 == f64::NEG_INFINITY && l2 == f64::NEG_INFINITY {
                    // both likelihoods vanish: no evidence either way
                    TestDecision::from_statistic(0.0)
                } else {
                    TestDecision::from_statistic(l1 - l2)
                }
            }
            Rule::Scheffe { in_a, p1_a, p2_a } => {
                let mu = if atoms.is_empty() {
                    0.0
                } else {
                    atoms.iter().filter(|&&i| in_a[i]).count() as f64 / atoms.len() as f64
                };
                TestDecision::from_statistic((p2_a - mu).abs() - (p1_a - mu).abs())
            }
            Rule::Additive {
                scores,
                offset,
                average,
            } => {
                let total: f64 = atoms.iter().map(|&i| scores[i]).sum();
                let n = atoms.len();
                let stat = if *average && n > 0 {
                    total / n as f64 + offset
                } else if *average {
                    *offset
                } else {
                    total + offset
                };
                TestDecision::from_statistic(stat)
            }
        }
    }
}

/// Decide a single batch with a freshly prepared test.
pub fn run_test(spec: &TestSpec, batch: &SampleBatch) -> Result<TestDecision> {
    spec.prepare()?.decide_batch(batch)
}

/// Exact one-sample expectation of Baraud's statistic under `p`:
/// `Σ p(x)[√(p₁/q) − √(p₂/q)](x) + H²(p₂,q) − H²(p₁,q)`.
pub fn baraud_expected_statistic(
    p: &BinnedDistribution,
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
) -> Result<f64> {
    p.check_aligned(p1)?;
    p1.check_aligned(p2)?;
    let (a, b) = (p1.masses(), p2.masses());
    let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
    let scores = root_ratio_scores(a, b, &q);
    let mean = compensated_sum(p.masses().iter().zip(&scores).map(|(w, s)| w * s));
    Ok(mean + hellinger_sq_masses(b, &q) - hellinger_sq_masses(a, &q))
}

/// Exact one-sample expectation of the midpoint statistic under `p`:
/// `Σ p(x)[√(p₁/u) − √(p₂/u)](x)`.
pub fn midpoint_expected_statistic(
    p: &BinnedDistribution,
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
) -> Result<f64> {
    p.check_aligned(p1)?;
    let u = hellinger_midpoint(p1, p2)?;
    let scores = root_ratio_scores(p1.masses(), p2.masses(), u.masses());
    Ok(compensated_sum(
        p.masses().iter().zip(&scores).map(|(w, s)| w * s),
    ))
}
