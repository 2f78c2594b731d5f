//! Seeded Monte Carlo estimation of test error rates.
//!
//! A truth distribution is classified as lying in `H0` (closer to `p₁`), `H1`
//! or neither. Each classified truth gets its own stream of `trials` batches;
//! type-I error is the worst error rate over `H0` truths and type-II the
//! worst over `H1` truths. Truths classified as neither are skipped and
//! counted.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversarial::{base_pair, make_member, FamilyParams, Side};
use crate::decision::{PreparedTest, RobustTest, TestFamily, TestSpec, Verdict};
use crate::dist::{BinnedDistribution, DistributionFile};
use crate::divergences::hellinger_sq;
use crate::error::{Error, Result};
use crate::geodesic::critical_radius;
use crate::numeric::{derive_seed, wilson_interval, Z_95};
use crate::parallel::{map_trials, Execution};

/// Stream index reserved for deriving per-cell seeds in a sweep.
const SWEEP_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthClass {
    H0,
    H1,
    Neither,
}

impl TruthClass {
    fn verdict(self) -> Option<Verdict> {
        match self {
            TruthClass::H0 => Some(Verdict::H0),
            TruthClass::H1 => Some(Verdict::H1),
            TruthClass::Neither => None,
        }
    }
}

/// `H0` if `γ·H²(p,p₁) ≤ H²(p,p₂)`, `H1` if `H²(p,p₁) ≥ γ·H²(p,p₂)`.
pub fn classify_truth(
    p: &BinnedDistribution,
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
    gamma: f64,
) -> Result<TruthClass> {
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(Error::param(format!("separation factor {gamma} must exceed 1")));
    }
    let d1 = hellinger_sq(p, p1)?;
    let d2 = hellinger_sq(p, p2)?;
    Ok(if gamma * d1 <= d2 {
        TruthClass::H0
    } else if d1 >= gamma * d2 {
        TruthClass::H1
    } else {
        TruthClass::Neither
    })
}

/// Ball classification for the composite problem: `H0` if
/// `H²(p,p₁) ≤ fraction·r*`, `H1` if `H²(p,p₂) ≤ fraction·r*`.
pub fn classify_within_radius(
    p: &BinnedDistribution,
    p1: &BinnedDistribution,
    p2: &BinnedDistribution,
    fraction: f64,
) -> Result<TruthClass> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param(format!("radius fraction {fraction} must lie in (0, 1]")));
    }
    let r = critical_radius(p1, p2)?;
    if r.degenerate {
        return Err(Error::DegenerateGeodesic);
    }
    let limit = fraction * r.radius;
    let (d1, d2) = (hellinger_sq(p, p1)?, hellinger_sq(p, p2)?);
    Ok(if d1 <= limit && d1 <= d2 {
        TruthClass::H0
    } else if d2 <= limit {
        TruthClass::H1
    } else {
        TruthClass::Neither
    })
}

/// How truths are assigned to hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Slack-factor separation with factor `gamma`.
    Separation { gamma: f64 },
    /// Hellinger balls of radius `fraction · r*` around each hypothesis.
    Radius { fraction: f64 },
}

impl Classification {
    /// `3 + 2√2`, the factor at which Baraud's statistic has the right sign
    /// in expectation.
    pub const DEFAULT_GAMMA: f64 = 3.0 + 2.0 * std::f64::consts::SQRT_2;

    pub fn classify(
        &self,
        p: &BinnedDistribution,
        p1: &BinnedDistribution,
        p2: &BinnedDistribution,
    ) -> Result<TruthClass> {
        match *self {
            Classification::Separation { gamma } => classify_truth(p, p1, p2, gamma),
            Classification::Radius { fraction } => classify_within_radius(p, p1, p2, fraction),
        }
    }
}

impl Default for Classification {
    fn default() -> Self {
        Classification::Separation {
            gamma: Self::DEFAULT_GAMMA,
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub test: TestFamily,
    pub p1: BinnedDistribution,
    pub p2: BinnedDistribution,
    /// Distributions the samples are drawn from.
    pub truths: Vec<BinnedDistribution>,
    pub sample_count: usize,
    pub trials: u64,
    pub seed: u64,
    /// Target error level.
    pub delta: f64,
    pub classification: Classification,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub const DEFAULT_DELTA: f64 = 1.0 / 3.0;

    /// Experiment with truths `p₁` and `p₂` and default settings.
    pub fn new(
        test: TestFamily,
        p1: BinnedDistribution,
        p2: BinnedDistribution,
        sample_count: usize,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            test,
            truths: vec![p1.clone(), p2.clone()],
            p1,
            p2,
            sample_count,
            trials,
            seed,
            delta: Self::DEFAULT_DELTA,
            classification: Classification::default(),
            execution: Execution::default(),
        }
    }

    pub fn with_truths(mut self, truths: Vec<BinnedDistribution>) -> Self {
        self.truths = truths;
        self
    }

    pub fn with_classification(mut self, classification: Classification) -> Self {
        self.classification = classification;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::NoTrials);
        }
        if self.sample_count == 0 {
            return Err(Error::param("sample count must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::param(format!("delta = {} must lie in (0, 0.5)", self.delta)));
        }
        if self.truths.is_empty() {
            return Err(Error::param("at least one truth distribution is required"));
        }
        Ok(())
    }
}

/// Result for one truth distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthOutcome {
    pub label: String,
    pub class: TruthClass,
    pub hellinger_to_p1: f64,
    pub hellinger_to_p2: f64,
    pub trials: u64,
    pub errors: u64,
    pub ties: u64,
    pub error_rate: f64,
}

/// Error rates of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub sample_count: usize,
    pub type1: f64,
    pub type2: f64,
    pub max_error: f64,
    /// Half-width of the 95% Wilson interval around `max_error`.
    pub ci_halfwidth: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Trials per classified truth.
    pub trials: u64,
    pub seed: u64,
    pub h0_trials: u64,
    pub h1_trials: u64,
    pub excluded_trials: u64,
    pub truths: Vec<TruthOutcome>,
}

pub fn estimate_error(config: &ExperimentConfig) -> Result<ErrorEstimate> {
    config.validate()?;
    let spec = TestSpec::new(config.test, config.p1.clone(), config.p2.clone())?;
    let test = spec.prepare()?;
    estimate_error_with(config, &test)
}

/// Like [`estimate_error`] with a caller-supplied decision procedure.
pub fn estimate_error_with(config: &ExperimentConfig, test: &dyn RobustTest) -> Result<ErrorEstimate> {
    config.validate()?;
    let mut truths = Vec::with_capacity(config.truths.len());
    // (errors, trials) of the worst truth in each class
    let mut worst = [(0u64, 0u64); 2];
    let (mut h0_trials, mut h1_trials, mut excluded_trials) = (0, 0, 0);

    for (stream, truth) in config.truths.iter().enumerate() {
        let class = config.classification.classify(truth, &config.p1, &config.p2)?;
        let hellinger_to_p1 = hellinger_sq(truth, &config.p1)?;
        let hellinger_to_p2 = hellinger_sq(truth, &config.p2)?;
        let Some(expected) = class.verdict() else {
            excluded_trials += config.trials;
            truths.push(TruthOutcome {
                label: truth.label().to_string(),
                class,
                hellinger_to_p1,
                hellinger_to_p2,
                trials: 0,
                errors: 0,
                ties: 0,
                error_rate: 0.0,
            });
            continue;
        };
        let (errors, ties) = run_stream(config, test, truth, stream as u64, expected);
        let slot = match expected {
            Verdict::H0 => {
                h0_trials += config.trials;
                &mut worst[0]
            }
            Verdict::H1 => {
                h1_trials += config.trials;
                &mut worst[1]
            }
        };
        if slot.1 == 0 || errors > slot.0 {
            *slot = (errors, config.trials);
        }
        truths.push(TruthOutcome {
            label: truth.label().to_string(),
            class,
            hellinger_to_p1,
            hellinger_to_p2,
            trials: config.trials,
            errors,
            ties,
            error_rate: errors as f64 / config.trials as f64,
        });
    }
    if h0_trials + h1_trials == 0 {
        return Err(Error::NoClassifiableTruth);
    }

    let rate = |(e, t): (u64, u64)| if t == 0 { 0.0 } else { e as f64 / t as f64 };
    let (type1, type2) = (rate(worst[0]), rate(worst[1]));
    let (errors, trials) = if type1 >= type2 { worst[0] } else { worst[1] };
    let (ci_low, ci_high) = wilson_interval(errors, trials, Z_95);
    Ok(ErrorEstimate {
        sample_count: config.sample_count,
        type1,
        type2,
        max_error: type1.max(type2),
        ci_halfwidth: (ci_high - ci_low) / 2.0,
        ci_low,
        ci_high,
        trials: config.trials,
        seed: config.seed,
        h0_trials,
        h1_trials,
        excluded_trials,
        truths,
    })
}

/// `(errors, ties)` over one truth's trial stream.
fn run_stream(
    config: &ExperimentConfig,
    test: &dyn RobustTest,
    truth: &BinnedDistribution,
    stream: u64,
    expected: Verdict,
) -> (u64, u64) {
    let sampler = truth.sampler();
    let outcomes = map_trials(config.trials, config.execution, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, stream, t));
        let mut atoms = Vec::with_capacity(config.sample_count);
        sampler.fill(&mut rng, config.sample_count, &mut atoms);
        let d = test.decide(&atoms);
        (d.verdict != expected, d.tie_broken)
    });
    outcomes
        .into_iter()
        .fold((0, 0), |(e, t), (wrong, tie)| (e + wrong as u64, t + tie as u64))
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub estimate: ErrorEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub test: TestFamily,
    pub delta: f64,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    /// Smallest sample count whose `max_error` fell below `delta`.
    pub first_m_below_delta: Option<usize>,
}

impl SweepTable {
    /// CSV with columns `m,type1,type2,max_error,ci,trials,seed`; `ci` is the
    /// Wilson half-width and `seed` the cell's derived seed.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "type1", "type2", "max_error", "ci", "trials", "seed"])?;
        for row in &self.rows {
            let e = &row.estimate;
            w.write_record([
                row.m.to_string(),
                e.type1.to_string(),
                e.type2.to_string(),
                e.max_error.to_string(),
                e.ci_halfwidth.to_string(),
                e.trials.to_string(),
                e.seed.to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Seed used for the sweep cell at sample count `m`.
pub fn sweep_cell_seed(seed: u64, m: usize) -> u64 {
    derive_seed(seed, SWEEP_STREAM, m as u64)
}

/// One estimate per sample count; `m_grid` must be strictly increasing.
pub fn sample_complexity_sweep(config: &ExperimentConfig, m_grid: &[usize]) -> Result<SweepTable> {
    if m_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("sample-count grid must be strictly increasing"));
    }
    let spec = TestSpec::new(config.test, config.p1.clone(), config.p2.clone())?;
    let test: PreparedTest = spec.prepare()?;
    let rows = m_grid
        .iter()
        .map(|&m| {
            let cell = ExperimentConfig {
                sample_count: m,
                seed: sweep_cell_seed(config.seed, m),
                ..config.clone()
            };
            estimate_error_with(&cell, &test).map(|estimate| SweepRow { m, estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    let first_m_below_delta = rows
        .iter()
        .find(|r| r.estimate.max_error < config.delta)
        .map(|r| r.m);
    Ok(SweepTable {
        test: config.test,
        delta: config.delta,
        seed: config.seed,
        rows,
        first_m_below_delta,
    })
}

/// A distribution given inline or as a path to a distribution file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSource {
    Path(PathBuf),
    Inline(DistributionFile),
}

impl DistributionSource {
    /// Resolve relative paths against `base`.
    pub fn load(&self, base: &Path) -> Result<BinnedDistribution> {
        match self {
            DistributionSource::Path(p) => BinnedDistribution::load(base.join(p)),
            DistributionSource::Inline(file) => BinnedDistribution::try_from(file.clone()),
        }
    }
}

/// Perturbed-family instance used in place of explicit distributions:
/// `p₁`, `p₂` become the base pair and the truths one member of each family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySource {
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
    /// Bins per half.
    pub bins: usize,
}

/// On-disk experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub test: TestFamily,
    #[serde(default)]
    pub p1: Option<DistributionSource>,
    #[serde(default)]
    pub p2: Option<DistributionSource>,
    #[serde(default)]
    pub truths: Option<Vec<DistributionSource>>,
    #[serde(default)]
    pub family: Option<FamilySource>,
    #[serde(alias = "sample_count")]
    pub m: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Classify by balls of this fraction of the critical radius instead.
    #[serde(default)]
    pub radius: Option<f64>,
}

impl ExperimentFile {
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

    /// Build the experiment, loading files relative to `base`. A seed given
    /// in the file wins over `fallback_seed`.
    pub fn resolve(&self, base: &Path, fallback_seed: u64) -> Result<ExperimentConfig> {
        let (p1, p2, default_truths) = match (&self.family, &self.p1, &self.p2) {
            (Some(f), None, None) => {
                let params = FamilyParams::new(f.b, f.a1, f.a2, f.bins)?;
                let (p1, p2) = base_pair(f.b, f.bins)?;
                let leading = |k: usize| (0..k).collect::<Vec<_>>();
                let truths = Side::BOTH
                    .into_iter()
                    .map(|side| {
                        make_member(&params, &leading(params.r1_size()), &leading(params.r2_size()), side)
                            .map(|m| {
                                let label = match side {
                                    Side::PerturbP1 => "member-perturbing-p1",
                                    Side::PerturbP2 => "member-perturbing-p2",
                                };
                                m.distribution.with_label(label)
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (p1, p2, truths)
            }
            (None, Some(a), Some(b)) => {
                let p1 = a.load(base)?;
                let p2 = b.load(base)?;
                let truths = vec![p1.clone(), p2.clone()];
                (p1, p2, truths)
            }
            _ => {
                return Err(Error::param(
                    "give either `family` or both `p1` and `p2`",
                ))
            }
        };
        let truths = match &self.truths {
            Some(list) => list
                .iter()
                .map(|t| t.load(base))
                .collect::<Result<Vec<_>>>()?,
            None => default_truths,
        };
        let classification = match (self.gamma, self.radius) {
            (Some(_), Some(_)) => {
                return Err(Error::param("`gamma` and `radius` are mutually exclusive"))
            }
            (Some(gamma), None) => Classification::Separation { gamma },
            (None, Some(fraction)) => Classification::Radius { fraction },
            (None, None) => Classification::default(),
        };
        let config = ExperimentConfig {
            test: self.test,
            p1,
            p2,
            truths,
            sample_count: self.m,
            trials: self.trials,
            seed: self.seed.unwrap_or(fallback_seed),
            delta: self.delta.unwrap_or(ExperimentConfig::DEFAULT_DELTA),
            classification,
            execution: Execution::default(),
        };
        config.validate()?;
        Ok(config)
    }
}
