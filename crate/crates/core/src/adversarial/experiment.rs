//! Monte Carlo play of a test against the two mixture products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FamilyParams, IndexSubset, MemberSampler, Side};
use crate::decision::RobustTest;
use crate::error::{Error, Result};
use crate::numeric::{derive_seed, wilson_interval, Z_95};
use crate::parallel::{map_trials, Execution};

/// The law of `m` samples obtained by picking a member uniformly at random
/// from one family and then drawing i.i.d. from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureProduct {
    pub family_side: Side,
    pub params: FamilyParams,
    pub sample_count: usize,
}

impl MixtureProduct {
    pub fn new(family_side: Side, params: FamilyParams, sample_count: usize) -> Self {
        Self {
            family_side,
            params,
            sample_count,
        }
    }

    /// One draw of `m` bin indices in `0..2N`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let n = self.params.num_bins_half();
        let r1 = IndexSubset::random(rng, n, self.params.r1_size());
        let r2 = IndexSubset::random(rng, n, self.params.r2_size());
        let sampler = MemberSampler::new(&self.params, r1, r2, self.family_side);
        (0..self.sample_count).map(|_| sampler.draw(rng)).collect()
    }
}

/// Whether no bin holds two of the samples.
fn collision_free(atoms: &[usize]) -> bool {
    let mut sorted = atoms.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Outcome of playing a test against the two mixture products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndistinguishabilityEstimate {
    pub trials: u64,
    pub seed: u64,
    /// Rounds drawn from the first family, and errors (declared H1) on them.
    pub d1_trials: u64,
    pub d1_errors: u64,
    /// Rounds drawn from the second family, and errors (declared H0) on them.
    pub d2_trials: u64,
    pub d2_errors: u64,
    /// Errors over all rounds, with its standard error.
    pub average_error: f64,
    pub standard_error: f64,
    /// Worse of the two per-family error rates, with a 95% Wilson interval.
    pub max_side_error: f64,
    pub max_side_ci_low: f64,
    pub max_side_ci_high: f64,
    /// Fraction of rounds whose samples fell in distinct bins.
    pub collision_free_rate: f64,
}

/// Play `test` for `trials` rounds: each round picks a family uniformly, a
/// member uniformly, draws `m` samples and records whether the verdict
/// names the wrong base distribution.
pub fn indistinguishability_experiment(
    params: &FamilyParams,
    m: usize,
    test: &dyn RobustTest,
    trials: u64,
    seed: u64,
) -> Result<IndistinguishabilityEstimate> {
    indistinguishability_experiment_with(params, m, test, trials, seed, Execution::Parallel)
}

pub fn indistinguishability_experiment_with(
    params: &FamilyParams,
    m: usize,
    test: &dyn RobustTest,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<IndistinguishabilityEstimate> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if m == 0 {
        return Err(Error::param("sample count must be positive"));
    }
    let rounds = map_trials(trials, execution, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, t));
        let side = if rng.random_bool(0.5) {
            Side::PerturbP1
        } else {
            Side::PerturbP2
        };
        let atoms = MixtureProduct::new(side, *params, m).sample(&mut rng);
        let wrong = test.decide(&atoms).verdict != side.hypothesis();
        (side, wrong, collision_free(&atoms))
    });

    let (mut d1_trials, mut d1_errors, mut d2_trials, mut d2_errors, mut distinct) = (0, 0, 0, 0, 0);
    for (side, wrong, free) in rounds {
        match side {
            Side::PerturbP1 => {
                d1_trials += 1;
                d1_errors += wrong as u64;
            }
            Side::PerturbP2 => {
                d2_trials += 1;
                d2_errors += wrong as u64;
            }
        }
        distinct += free as u64;
    }
    let n = trials as f64;
    let average_error = (d1_errors + d2_errors) as f64 / n;
    let standard_error = (average_error * (1.0 - average_error) / n).sqrt();
    let rate = |e: u64, t: u64| if t == 0 { 0.0 } else { e as f64 / t as f64 };
    let (worse_errors, worse_trials) = if rate(d1_errors, d1_trials) >= rate(d2_errors, d2_trials) {
        (d1_errors, d1_trials)
    } else {
        (d2_errors, d2_trials)
    };
    let (max_side_ci_low, max_side_ci_high) = wilson_interval(worse_errors, worse_trials, Z_95);
    Ok(IndistinguishabilityEstimate {
        trials,
        seed,
        d1_trials,
        d1_errors,
        d2_trials,
        d2_errors,
        average_error,
        standard_error,
        max_side_error: rate(worse_errors, worse_trials),
        max_side_ci_low,
        max_side_ci_high,
        collision_free_rate: distinct as f64 / n,
    })
}
