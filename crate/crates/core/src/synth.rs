//! Random distributions for property checks and reproduction presets.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::dist::BinnedDistribution;

/// Dirichlet(alpha, …, alpha) draw over `k` atoms.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize, alpha: f64) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive concentration");
    loop {
        let w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 && total.is_finite() {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Point-support distribution with Dirichlet(alpha) masses.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, k: usize, alpha: f64) -> BinnedDistribution {
    BinnedDistribution::points(dirichlet(rng, k, alpha)).expect("dirichlet draw is a distribution")
}

/// Like [`random_distribution`] but each atom is zeroed with probability
/// `zero_prob` (at least one atom keeps its mass).
pub fn random_sparse_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    alpha: f64,
    zero_prob: f64,
) -> BinnedDistribution {
    let mut w = dirichlet(rng, k, alpha);
    let keep = rng.random_range(0..k);
    for (i, x) in w.iter_mut().enumerate() {
        if i != keep && rng.random_bool(zero_prob) {
            *x = 0.0;
        }
    }
    let total: f64 = w.iter().sum();
    BinnedDistribution::points(w.into_iter().map(|x| x / total).collect())
        .expect("renormalized draw is a distribution")
}
