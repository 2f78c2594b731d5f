//! Named reproduction runs with machine-readable pass/fail reports.
//!
//! Each preset exercises one quantitative claim end to end and reports the
//! measured values next to the requirement they were checked against.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversarial::{
    base_pair, collision_probability, conditional_equality_check, conditioning_tv_bound,
    family_distance_profile, indistinguishability_experiment, lecam_floor, minimal_collision_constant,
    mixture_marginal, schedule_bins, FamilyParams, Side,
};
use crate::decision::{
    baraud_expected_statistic, midpoint_expected_statistic, RobustTest, TestFamily, TestSpec,
    Verdict,
};
use crate::dist::{align_all, mixture, BinnedDistribution};
use crate::divergences::{hellinger_sq, DivergenceReport};
use crate::error::{Error, Result};
use crate::geodesic::{critical_radius, geodesic_angle, geodesic_point, hellinger_midpoint};
use crate::harness::{estimate_error, Classification, ExperimentConfig, TruthClass};
use crate::numeric::{derive_seed, wilson_interval, Z_95};
use crate::parallel::{map_trials, Execution};
use crate::synth::{dirichlet, random_distribution, random_sparse_distribution};

pub const DEFAULT_PRESET_SEED: u64 = 0x4845_4c4c_494e_4752;

/// Slack factor beyond which Baraud's statistic has the right sign in expectation.
const BARAUD_GAMMA: f64 = (SQRT_2 + 1.0) / (SQRT_2 - 1.0);
/// Limit of the far/near Hellinger ratio of the perturbed families.
const FAMILY_LIMIT_RATIO: f64 = SQRT_2 / (SQRT_2 - 1.0);

/// A single measured quantity and the requirement it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::serde_float")]
    pub value: f64,
    pub requirement: String,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, requirement: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            requirement: requirement.into(),
            passed,
        }
    }

    fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self::new(
            name,
            value,
            format!("|value - {target}| <= {tol:e}"),
            (value - target).abs() <= tol,
        )
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, format!(">= {bound}"), value >= bound)
    }

    fn below(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, format!("< {bound}"), value < bound)
    }
}

/// Outcome of one preset. The wall-clock time is kept out of the serialized
/// form so that reports for a fixed seed are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetReport {
    pub preset: String,
    pub criterion: u8,
    pub description: String,
    pub seed: u64,
    pub passed: bool,
    pub runtime_limit_seconds: Option<f64>,
    pub within_runtime_limit: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub elapsed: Duration,
}

struct Outcome {
    checks: Vec<Check>,
    details: serde_json::Value,
}

struct Preset {
    name: &'static str,
    criterion: u8,
    description: &'static str,
    runtime_limit: Option<f64>,
    run: fn(u64) -> Result<Outcome>,
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "hellinger-ratio",
        criterion: 1,
        description: "Hellinger distances of the perturbed family in the limit regime",
        runtime_limit: Some(1.0),
        run: hellinger_ratio,
    },
    Preset {
        name: "chi2-ratio",
        criterion: 2,
        description: "Symmetric chi-square distances of the perturbed family",
        runtime_limit: Some(1.0),
        run: chi2_ratio,
    },
    Preset {
        name: "baraud-sign",
        criterion: 3,
        description: "Sign of Baraud's expected statistic on separated random triples",
        runtime_limit: Some(5.0),
        run: baraud_sign,
    },
    Preset {
        name: "baraud-end-to-end",
        criterion: 4,
        description: "Baraud's test on a well-separated Bernoulli problem",
        runtime_limit: Some(30.0),
        run: baraud_end_to_end,
    },
    Preset {
        name: "ml-failure",
        criterion: 5,
        description: "Maximum likelihood on shifted uniforms errs with probability 1-(1-eps)^m",
        runtime_limit: None,
        run: ml_failure,
    },
    Preset {
        name: "collision-schedule",
        criterion: 6,
        description: "Collision-free probability under the bin schedule and the two-point error floor",
        runtime_limit: None,
        run: collision_schedule,
    },
    Preset {
        name: "conditional-equality",
        criterion: 7,
        description: "Exact conditional laws of the two mixture products given no collisions",
        runtime_limit: None,
        run: conditional_equality,
    },
    Preset {
        name: "lecam-floor",
        criterion: 8,
        description: "Average error of concrete tests against the two mixture products",
        runtime_limit: Some(120.0),
        run: lecam_floor_preset,
    },
    Preset {
        name: "disjoint-tightness",
        criterion: 9,
        description: "Majority mass and error of the disjoint-support test",
        runtime_limit: None,
        run: disjoint_tightness,
    },
    Preset {
        name: "composite-radius",
        criterion: 10,
        description: "Midpoint test inside the critical Hellinger radius",
        runtime_limit: None,
        run: composite_radius,
    },
    Preset {
        name: "divergence-sandwich",
        criterion: 11,
        description: "Hellinger sandwiched between total variation and symmetric chi-square",
        runtime_limit: None,
        run: divergence_sandwich,
    },
];

/// Names of every preset, in criterion order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

pub fn run_preset(name: &str, seed: u64) -> Result<PresetReport> {
    let preset = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    let start = Instant::now();
    let outcome = (preset.run)(seed)?;
    let elapsed = start.elapsed();
    let within_runtime_limit = preset
        .runtime_limit
        .map_or(true, |limit| elapsed.as_secs_f64() < limit);
    Ok(PresetReport {
        preset: preset.name.to_string(),
        criterion: preset.criterion,
        description: preset.description.to_string(),
        seed,
        passed: within_runtime_limit && outcome.checks.iter().all(|c| c.passed),
        runtime_limit_seconds: preset.runtime_limit,
        within_runtime_limit,
        checks: outcome.checks,
        details: outcome.details,
        elapsed,
    })
}

pub fn run_all_presets(seed: u64) -> Result<Vec<PresetReport>> {
    PRESETS.iter().map(|p| run_preset(p.name, seed)).collect()
}

/// `b = 1`, `a₂ = 1`, `a₁ = 10⁶`, with the smallest `N` that makes
/// `|R₁| = N/a₁` an integer.
fn limit_params() -> Result<FamilyParams> {
    FamilyParams::new(1.0, 1e6, 1.0, 1_000_000)
}

fn hellinger_ratio(_seed: u64) -> Result<Outcome> {
    let params = limit_params()?;
    let profile = family_distance_profile(&params, Side::PerturbP1)?;
    let near_exact = 0.25 * ((SQRT_2 - 1.0).powi(2) + 1.0);
    let checks = vec![
        Check::within("hellinger_ratio", profile.hellinger_ratio, FAMILY_LIMIT_RATIO, 3e-3),
        Check::within("hellinger_to_p1", profile.closed_form.hellinger_to_p1, near_exact, 1e-12),
        Check::within(
            "instantiated_hellinger_to_p1",
            profile.instantiated.hellinger_to_p1,
            near_exact,
            1e-12,
        ),
        Check::new(
            "closed_form_vs_instantiated",
            profile.discrepancy,
            "<= 1e-12",
            profile.discrepancy <= 1e-12,
        ),
    ];
    Ok(Outcome {
        checks,
        details: json!({ "params": params, "profile": profile }),
    })
}

fn chi2_ratio(_seed: u64) -> Result<Outcome> {
    let params = limit_params()?;
    let profile = family_distance_profile(&params, Side::PerturbP1)?;
    let checks = vec![
        Check::within("chi_sq_to_p1", profile.closed_form.chi_sq_to_p1, 2.0 / 3.0, 1e-12),
        Check::within(
            "instantiated_chi_sq_to_p1",
            profile.instantiated.chi_sq_to_p1,
            2.0 / 3.0,
            1e-12,
        ),
        Check::within("chi_sq_ratio", profile.chi_sq_ratio, 3.0, 3e-3),
    ];
    Ok(Outcome {
        checks,
        details: json!({ "params": params, "profile": profile }),
    })
}

/// `near` mixed with a random distribution at a uniform weight, so that the
/// rejection step below sees truths all the way out to the separation boundary.
fn perturb_towards<R: Rng>(rng: &mut R, near: &BinnedDistribution) -> BinnedDistribution {
    let w = random_distribution(rng, near.len(), 1.0);
    let lambda = rng.random::<f64>();
    mixture(near, &w, 1.0 - lambda).expect("aligned point supports")
}

fn baraud_sign(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = 500;
    let (mut h0, mut h1) = (Vec::new(), Vec::new());
    let mut drawn = 0u64;
    while h0.len() < wanted || h1.len() < wanted {
        drawn += 1;
        let k = rng.random_range(2..=20);
        let p1 = random_distribution(&mut rng, k, 1.0);
        let p2 = random_distribution(&mut rng, k, 1.0);
        let toward_p1 = rng.random_bool(0.5);
        let p = perturb_towards(&mut rng, if toward_p1 { &p1 } else { &p2 });
        let d1 = hellinger_sq(&p, &p1)?;
        let d2 = hellinger_sq(&p, &p2)?;
        if d2 >= BARAUD_GAMMA * d1 && h0.len() < wanted {
            h0.push(baraud_expected_statistic(&p, &p1, &p2)?);
        } else if d1 >= BARAUD_GAMMA * d2 && h1.len() < wanted {
            h1.push(baraud_expected_statistic(&p, &p1, &p2)?);
        }
    }
    let min_h0 = h0.iter().copied().fold(f64::INFINITY, f64::min);
    let max_h1 = h1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        checks: vec![
            Check::at_least("min_expected_statistic_h0", min_h0, -1e-12),
            Check::new("max_expected_statistic_h1", max_h1, "<= 1e-12", max_h1 <= 1e-12),
        ],
        details: json!({
            "gamma": BARAUD_GAMMA,
            "h0_triples": h0.len(),
            "h1_triples": h1.len(),
            "candidates_drawn": drawn,
        }),
    })
}

fn baraud_end_to_end(seed: u64) -> Result<Outcome> {
    let pts = |m: [f64; 2], label: &str| BinnedDistribution::points(m.to_vec()).map(|d| d.with_label(label));
    let p1 = pts([0.9, 0.1], "p1")?;
    let p2 = pts([0.1, 0.9], "p2")?;
    let truths = vec![pts([0.82, 0.18], "near-p1")?, pts([0.18, 0.82], "near-p2")?];
    let gamma = 6.0;
    let config = ExperimentConfig::new(TestFamily::Baraud, p1, p2, 200, 10_000, seed)
        .with_truths(truths)
        .with_classification(Classification::Separation { gamma });
    let estimate = estimate_error(&config)?;
    let all_classified = estimate.truths.iter().all(|t| t.class != TruthClass::Neither);
    Ok(Outcome {
        checks: vec![
            Check::new(
                "classified_truths",
                estimate.truths.iter().filter(|t| t.class != TruthClass::Neither).count() as f64,
                "every truth separated by gamma = 6",
                all_classified,
            ),
            Check::below("max_error", estimate.max_error, 1.0 / 3.0),
        ],
        details: json!({ "gamma": gamma, "estimate": estimate }),
    })
}

/// `unif[−1, 1]`, `unif[ε, 1 + ε]` and `unif[0, 1]` on a common grid.
pub fn shifted_uniforms(eps: f64) -> Result<[BinnedDistribution; 3]> {
    let d = align_all(&[
        BinnedDistribution::uniform_bins(-1.0, 1.0, 1)?.with_label("unif[-1,1]"),
        BinnedDistribution::uniform_bins(eps, 1.0 + eps, 1)?.with_label("unif[eps,1+eps]"),
        BinnedDistribution::uniform_bins(0.0, 1.0, 1)?.with_label("unif[0,1]"),
    ])?;
    let [a, b, c]: [BinnedDistribution; 3] = d.try_into().expect("three inputs");
    Ok([a, b, c])
}

fn ml_failure(seed: u64) -> Result<Outcome> {
    let eps = 0.01;
    let [far, near, truth] = shifted_uniforms(eps)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for m in [50usize, 300] {
        let config = ExperimentConfig::new(TestFamily::MaximumLikelihood, far.clone(), near.clone(), m, 10_000, seed)
            .with_truths(vec![truth.clone()]);
        let e = estimate_error(&config)?;
        let exact = 1.0 - (1.0 - eps).powi(m as i32);
        checks.push(Check::new(
            format!("exact_error_in_ci_m{m}"),
            exact,
            format!("within [{:.6}, {:.6}]", e.ci_low, e.ci_high),
            e.ci_low <= exact && exact <= e.ci_high,
        ));
        if m == 300 {
            checks.push(Check::at_least("error_m300", e.max_error, 0.9));
        }
        rows.push(json!({ "m": m, "exact_error": exact, "estimate": e }));
    }
    Ok(Outcome {
        checks,
        details: json!({ "eps": eps, "runs": rows }),
    })
}

fn collision_schedule(_seed: u64) -> Result<Outcome> {
    let ms = [10u64, 100, 1000];
    let target = 11.0 / 12.0;
    let c = minimal_collision_constant(&ms, target)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for m in ms {
        let n = schedule_bins(c, m);
        let p = collision_probability(n, m);
        checks.push(Check::at_least(&format!("collision_free_m{m}"), p, target));
        rows.push(json!({ "m": m, "bins_half": n, "collision_free": p }));
    }
    let tv = conditioning_tv_bound(0.0, 1.0 / 12.0, 1.0 / 12.0)?;
    checks.push(Check::new("tv_bound", tv, "== 1/3", tv == 1.0 / 3.0));
    let third = Ratio::new(1i64, 3);
    let exact_tv = conditioning_tv_bound(Ratio::from_integer(0), Ratio::new(1, 12), Ratio::new(1, 12))?;
    let exact_floor = lecam_floor(third)?;
    checks.push(Check::new(
        "lecam_floor_exact",
        *exact_floor.numer() as f64 / *exact_floor.denom() as f64,
        "== 1/3 in rational arithmetic",
        exact_tv == third && exact_floor == third,
    ));
    let float_floor = lecam_floor(1.0 / 3.0)?;
    checks.push(Check::new(
        "lecam_floor_f64",
        float_floor,
        "within one ulp of 1/3",
        (float_floor - 1.0 / 3.0).abs() <= f64::EPSILON / 2.0,
    ));
    Ok(Outcome {
        checks,
        details: json!({ "constant": c, "target": target, "schedule": rows }),
    })
}

/// Small instances checked by exhaustive enumeration: `(b, a₁, a₂, N, m)`.
pub const ENUMERATED_INSTANCES: [(f64, f64, f64, usize, usize); 6] = [
    (1.0, 2.0, 1.0, 2, 2),
    (1.0, 2.0, 1.0, 4, 2),
    (1.0, 3.0, 1.0, 3, 3),
    (1.0, 2.0, 2.0, 6, 3),
    (0.5, 1.0, 1.0, 4, 3),
    (0.5, 1.0, 0.5, 6, 3),
];

fn conditional_equality(_seed: u64) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (b, a1, a2, n, m) in ENUMERATED_INSTANCES {
        let params = FamilyParams::new(b, a1, a2, n)?;
        let c = conditional_equality_check(&params, m)?;
        checks.push(Check::new(
            format!("conditional_gap_b{b}_a1{a1}_a2{a2}_n{n}_m{m}"),
            c.max_abs_difference,
            "<= 1e-12",
            c.equal,
        ));
        let uniform = 1.0 / (2 * n) as f64;
        let worst = Side::BOTH
            .into_iter()
            .map(|side| mixture_marginal(&params, side))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .map(|x| (x - uniform).abs())
            .fold(0.0, f64::max);
        checks.push(Check::new(
            format!("marginal_gap_b{b}_a1{a1}_a2{a2}_n{n}"),
            worst,
            "== 0",
            worst == 0.0,
        ));
        rows.push(json!({ "params": params, "m": m, "comparison": c }));
    }
    Ok(Outcome {
        checks,
        details: json!({ "instances": rows }),
    })
}

fn lecam_floor_preset(seed: u64) -> Result<Outcome> {
    let m = 50u64;
    let c = minimal_collision_constant(&[10, 100, 1000], 11.0 / 12.0)?;
    let n = schedule_bins(c, m) as usize;
    let a1 = (m - 1) as f64;
    let params = FamilyParams::new(1.0, a1, 1.0, n)?;
    let (p1, p2) = base_pair(1.0, n)?;
    let trials = 10_000;
    let mut checks = Vec::new();
    let mut runs = Vec::new();
    for family in [TestFamily::Baraud, TestFamily::Scheffe, TestFamily::HellingerMidpoint] {
        let test = TestSpec::new(family, p1.clone(), p2.clone())?.prepare()?;
        let e = indistinguishability_experiment(&params, m as usize, &test, trials, seed)?;
        let floor = 1.0 / 3.0 - 3.0 * e.standard_error;
        checks.push(Check::at_least(&format!("average_error_{family}"), e.average_error, floor));
        runs.push(json!({ "test": family, "estimate": e }));
    }
    Ok(Outcome {
        checks,
        details: json!({
            "m": m,
            "collision_constant": c,
            "params": params,
            "collision_free_uniform": collision_probability(n as u64, m),
            "runs": runs,
        }),
    })
}

fn disjoint_tightness(seed: u64) -> Result<Outcome> {
    let gamma = SQRT_2 / (SQRT_2 - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = 500;
    let mut min_mass = f64::INFINITY;
    let mut accepted = 0;
    let mut drawn = 0u64;
    let mut gapped = Vec::new();
    while accepted < wanted {
        drawn += 1;
        let k1 = rng.random_range(1..=8);
        let k2 = rng.random_range(1..=8);
        let extra = rng.random_range(0..=4);
        let k = k1 + k2 + extra;
        let mut a = vec![0.0; k];
        let mut b = vec![0.0; k];
        a[..k1].copy_from_slice(&dirichlet(&mut rng, k1, 1.0));
        b[k1..k1 + k2].copy_from_slice(&dirichlet(&mut rng, k2, 1.0));
        let p1 = BinnedDistribution::points(a)?;
        let p2 = BinnedDistribution::points(b)?;
        let p = perturb_towards(&mut rng, &p1);
        if gamma * hellinger_sq(&p, &p1)? > hellinger_sq(&p, &p2)? {
            continue;
        }
        accepted += 1;
        let s1 = p.mass_of(|i| i < k1);
        let s2 = p.mass_of(|i| i >= k1 && i < k1 + k2);
        min_mass = min_mass.min(s1);
        if s1 - s2 >= 0.1 && gapped.len() < 20 {
            gapped.push((p1, p2, p));
        }
    }

    let m = 500;
    let trials = 2_000;
    let mut worst_error: f64 = 0.0;
    for (index, (p1, p2, p)) in gapped.iter().enumerate() {
        let test = TestSpec::new(TestFamily::DisjointSupport, p1.clone(), p2.clone())?.prepare()?;
        let errors = count_errors(&test, p, m, trials, derive_seed(seed, 1, index as u64), Verdict::H0);
        worst_error = worst_error.max(errors as f64 / trials as f64);
    }
    Ok(Outcome {
        checks: vec![
            Check::at_least("min_support_mass", min_mass, 0.5),
            Check::new("gapped_triples", gapped.len() as f64, "== 20", gapped.len() == 20),
            Check::below("worst_error_m500", worst_error, 0.05),
        ],
        details: json!({
            "gamma": gamma,
            "triples": accepted,
            "candidates_drawn": drawn,
            "m": m,
            "trials_per_triple": trials,
        }),
    })
}

/// Errors of `test` over `trials` batches of `m` draws from `truth`.
fn count_errors(
    test: &dyn RobustTest,
    truth: &BinnedDistribution,
    m: usize,
    trials: u64,
    seed: u64,
    expected: Verdict,
) -> u64 {
    let sampler = truth.sampler();
    map_trials(trials, Execution::Parallel, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, t));
        let mut atoms = Vec::with_capacity(m);
        sampler.fill(&mut rng, m, &mut atoms);
        (test.decide(&atoms).verdict != expected) as u64
    })
    .into_iter()
    .sum()
}

fn composite_radius(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pairs, per_pair, m, trials) = (20, 100, 500, 10u64);
    let mut min_expected = f64::INFINITY;
    let mut max_radius_gap: f64 = 0.0;
    let mut max_ball_ratio: f64 = 0.0;
    let (mut errors, mut total) = (0u64, 0u64);
    for pair in 0..pairs {
        let k = rng.random_range(2..=20);
        let p1 = random_distribution(&mut rng, k, 1.0);
        let p2 = random_distribution(&mut rng, k, 1.0);
        let r = critical_radius(&p1, &p2)?;
        let u = hellinger_midpoint(&p1, &p2)?;
        max_radius_gap = max_radius_gap.max((r.radius - hellinger_sq(&p1, &u)?).abs());
        let test = TestSpec::new(TestFamily::HellingerMidpoint, p1.clone(), p2.clone())?.prepare()?;
        let mut made = 0;
        while made < per_pair {
            // walk from p₁ toward a random w until H² reaches the target
            let w = random_sparse_distribution(&mut rng, k, 1.0, 0.2);
            let target = 0.8 * r.radius * rng.random::<f64>();
            let phi = (1.0 - target).acos();
            let Ok(theta) = geodesic_angle(&p1, &w) else { continue };
            if theta == 0.0 || phi > theta {
                continue;
            }
            let p = geodesic_point(&p1, &w, phi)?.distribution;
            max_ball_ratio = max_ball_ratio.max(hellinger_sq(&p, &p1)? / r.radius);
            min_expected = min_expected.min(midpoint_expected_statistic(&p, &p1, &p2)?);
            let stream = derive_seed(seed, 2 + pair as u64, made as u64);
            errors += count_errors(&test, &p, m, trials, stream, Verdict::H0);
            total += trials;
            made += 1;
        }
    }
    let error_rate = errors as f64 / total as f64;
    let (ci_low, ci_high) = wilson_interval(errors, total, Z_95);
    Ok(Outcome {
        checks: vec![
            Check::new("min_expected_statistic", min_expected, "> 0", min_expected > 0.0),
            Check::new(
                "max_ball_fraction",
                max_ball_ratio,
                "<= 0.8 + 1e-12",
                max_ball_ratio <= 0.8 + 1e-12,
            ),
            Check::new("radius_vs_midpoint_distance", max_radius_gap, "<= 1e-10", max_radius_gap <= 1e-10),
            Check::below("error_rate_m500", error_rate, 0.05),
        ],
        details: json!({
            "pairs": pairs,
            "truths_per_pair": per_pair,
            "m": m,
            "trials_per_truth": trials,
            "errors": errors,
            "trials": total,
            "ci_low": ci_low,
            "ci_high": ci_high,
        }),
    })
}

fn divergence_sandwich(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = 1e-12;
    let mut worst = [f64::NEG_INFINITY; 4];
    for i in 0..1000 {
        let k = rng.random_range(1..=20);
        let (a, b) = if i % 2 == 0 {
            (random_distribution(&mut rng, k, 0.5), random_distribution(&mut rng, k, 0.5))
        } else {
            (
                random_sparse_distribution(&mut rng, k, 1.0, 0.4),
                random_sparse_distribution(&mut rng, k, 1.0, 0.4),
            )
        };
        let r = DivergenceReport::compute(&a, &b)?;
        let h = r.hellinger_sq;
        // each entry is `lower − upper`, which must stay ≤ slack
        let gaps = [
            0.5 * r.tv * r.tv - h,
            h - r.tv,
            0.25 * r.sym_chi_sq - h,
            h - 0.5 * r.sym_chi_sq,
        ];
        for (w, g) in worst.iter_mut().zip(gaps) {
            *w = w.max(g);
        }
    }
    let names = ["half_tv_sq_minus_h2", "h2_minus_tv", "quarter_chi_sq_minus_h2", "h2_minus_half_chi_sq"];
    Ok(Outcome {
        checks: names
            .iter()
            .zip(worst)
            .map(|(n, w)| Check::new(*n, w, format!("<= {slack:e}"), w <= slack))
            .collect(),
        details: json!({ "pairs": 1000 }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_preset() {
        assert!(matches!(run_preset("nope", 0), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn presets_are_numbered_in_order() {
        let numbers: Vec<u8> = PRESETS.iter().map(|p| p.criterion).collect();
        assert_eq!(numbers, (1..=11).collect::<Vec<_>>());
        assert_eq!(preset_names().len(), 11);
    }

    #[test]
    fn quick_presets_pass_and_are_deterministic() {
        for name in ["hellinger-ratio", "chi2-ratio", "collision-schedule", "divergence-sandwich"] {
            let a = run_preset(name, 3).unwrap();
            assert!(a.passed, "{name}: {:?}", a.checks);
            let b = run_preset(name, 3).unwrap();
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }
    }
}
