//! Statistical distances between two distributions on a common support.
//!
//! All four are computed on atom masses. For piecewise-constant densities on
//! equal-width bins the mass-based sums equal the corresponding integrals
//! exactly. Atoms where both masses vanish contribute nothing.

use serde::{Deserialize, Serialize};

use crate::dist::BinnedDistribution;
use crate::error::Result;
use crate::numeric::compensated_sum;

/// Squared Hellinger distance, `½ Σ (√a − √b)²`, in `[0, 1]`.
pub fn hellinger_sq(d1: &BinnedDistribution, d2: &BinnedDistribution) -> Result<f64> {
    d1.check_aligned(d2)?;
    Ok(hellinger_sq_masses(d1.masses(), d2.masses()))
}

/// Bhattacharyya coefficient, `Σ √(a b)`, in `[0, 1]`.
pub fn bhattacharyya(d1: &BinnedDistribution, d2: &BinnedDistribution) -> Result<f64> {
    d1.check_aligned(d2)?;
    Ok(bhattacharyya_masses(d1.masses(), d2.masses()))
}

/// Total variation, `½ Σ |a − b|`.
pub fn tv(d1: &BinnedDistribution, d2: &BinnedDistribution) -> Result<f64> {
    d1.check_aligned(d2)?;
    Ok(tv_masses(d1.masses(), d2.masses()))
}

/// Symmetric chi-square distance, `Σ (a − b)² / (a + b)`, with `0/0 = 0`.
pub fn sym_chi_sq(d1: &BinnedDistribution, d2: &BinnedDistribution) -> Result<f64> {
    d1.check_aligned(d2)?;
    Ok(sym_chi_sq_masses(d1.masses(), d2.masses()))
}

pub(crate) fn hellinger_sq_masses(a: &[f64], b: &[f64]) -> f64 {
    let sum = compensated_sum(a.iter().zip(b).map(|(&x, &y)| {
        let d = x.sqrt() - y.sqrt();
        d * d
    }));
    (0.5 * sum).clamp(0.0, 1.0)
}

pub(crate) fn bhattacharyya_masses(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| (x * y).sqrt())).clamp(0.0, 1.0)
}

pub(crate) fn tv_masses(a: &[f64], b: &[f64]) -> f64 {
    (0.5 * compensated_sum(a.iter().zip(b).map(|(&x, &y)| (x - y).abs()))).clamp(0.0, 1.0)
}

pub(crate) fn sym_chi_sq_masses(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| {
        let s = x + y;
        if s > 0.0 {
            (x - y) * (x - y) / s
        } else {
            0.0
        }
    }))
}

/// Every distance between one pair of distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub hellinger_sq: f64,
    pub bhattacharyya: f64,
    pub tv: f64,
    pub sym_chi_sq: f64,
}

impl DivergenceReport {
    pub fn compute(d1: &BinnedDistribution, d2: &BinnedDistribution) -> Result<Self> {
        d1.check_aligned(d2)?;
        let (a, b) = (d1.masses(), d2.masses());
        Ok(Self {
            hellinger_sq: hellinger_sq_masses(a, b),
            bhattacharyya: bhattacharyya_masses(a, b),
            tv: tv_masses(a, b),
            sym_chi_sq: sym_chi_sq_masses(a, b),
        })
    }

    /// Check the report's internal consistency (`H² = 1 − B` and both
    /// sandwich inequalities) with additive slack `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let h = self.hellinger_sq;
        (h - (1.0 - self.bhattacharyya)).abs() <= tol
            && 0.5 * self.tv * self.tv <= h + tol
            && h <= self.tv + tol
            && 0.25 * self.sym_chi_sq <= h + tol
            && h <= 0.5 * self.sym_chi_sq + tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::align_supports;
    use crate::synth::random_distribution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(m: &[f64]) -> BinnedDistribution {
        BinnedDistribution::points(m.to_vec()).unwrap()
    }

    /// Independent direct-summation oracle: densities on explicit atom lists,
    /// plain f64 loops, no shared helpers.
    fn oracle(a: &[f64], b: &[f64]) -> [f64; 4] {
        let mut h = 0.0;
        let mut bc = 0.0;
        let mut t = 0.0;
        let mut c = 0.0;
        for i in 0..a.len() {
            h += (a[i].sqrt() - b[i].sqrt()).powi(2) / 2.0;
            bc += a[i].sqrt() * b[i].sqrt();
            t += (a[i] - b[i]).abs() / 2.0;
            if a[i] + b[i] != 0.0 {
                c += (a[i] - b[i]).powi(2) / (a[i] + b[i]);
            }
        }
        [h, bc, t, c]
    }

    #[test]
    fn identical_distributions() {
        let p = pts(&[0.1, 0.2, 0.7]);
        let r = DivergenceReport::compute(&p, &p).unwrap();
        assert_eq!(r.hellinger_sq, 0.0);
        assert!((r.bhattacharyya - 1.0).abs() < 1e-15);
        assert_eq!(r.tv, 0.0);
        assert_eq!(r.sym_chi_sq, 0.0);
    }

    #[test]
    fn disjoint_distributions() {
        let p = pts(&[0.3, 0.7, 0.0, 0.0]);
        let q = pts(&[0.0, 0.0, 0.4, 0.6]);
        let r = DivergenceReport::compute(&p, &q).unwrap();
        assert!((r.hellinger_sq - 1.0).abs() < 1e-15);
        assert_eq!(r.bhattacharyya, 0.0);
        assert!((r.tv - 1.0).abs() < 1e-15);
        assert!((r.sym_chi_sq - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_pair_closed_forms() {
        let p = pts(&[0.75, 0.25]);
        let q = pts(&[0.25, 0.75]);
        assert!((bhattacharyya(&p, &q).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((tv(&p, &q).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shifted_uniform_hellinger() {
        // unif[0,1] vs unif[0.25,1.25] overlap on [0.25,1): H² = ε.
        let p = BinnedDistribution::uniform_bins(0.0, 1.0, 1).unwrap();
        let q = BinnedDistribution::uniform_bins(0.25, 1.25, 1).unwrap();
        let (p, q) = align_supports(&p, &q).unwrap();
        assert!((hellinger_sq(&p, &q).unwrap() - 0.25).abs() < 1e-12);

        // unif[0,1] vs unif[-1,1]: H² = 1 − 1/√2.
        let r = BinnedDistribution::uniform_bins(-1.0, 1.0, 1).unwrap();
        let (p, r) = align_supports(&p, &r).unwrap();
        let expected = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        assert!((hellinger_sq(&p, &r).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn mismatched_supports_rejected() {
        let p = pts(&[0.5, 0.5]);
        let q = pts(&[0.2, 0.3, 0.5]);
        assert!(hellinger_sq(&p, &q).is_err());
        assert!(sym_chi_sq(&p, &q).is_err());
        let b = BinnedDistribution::bins(0.0, 1.0, vec![0.5, 0.5]).unwrap();
        assert!(tv(&p, &b).is_err());
    }

    #[test]
    fn matches_oracle_on_small_rational_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let k = rng.random_range(1..=4);
            let mut draw = || {
                let w: Vec<u32> = (0..k).map(|_| rng.random_range(0..8)).collect();
                let total: u32 = w.iter().sum::<u32>().max(1);
                let mut m: Vec<f64> = w.iter().map(|&x| x as f64 / total as f64).collect();
                if w.iter().all(|&x| x == 0) {
                    m[0] = 1.0;
                }
                m
            };
            let (a, b) = (draw(), draw());
            let r = DivergenceReport::compute(&pts(&a), &pts(&b)).unwrap();
            let o = oracle(&a, &b);
            for (got, want) in [r.hellinger_sq, r.bhattacharyya, r.tv, r.sym_chi_sq]
                .into_iter()
                .zip(o)
            {
                assert!((got - want).abs() <= 1e-12, "{a:?} {b:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn symmetric_and_sandwiched_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let k = rng.random_range(1..=20);
            let a = random_distribution(&mut rng, k, 0.5);
            let b = random_distribution(&mut rng, k, 0.5);
            let ab = DivergenceReport::compute(&a, &b).unwrap();
            let ba = DivergenceReport::compute(&b, &a).unwrap();
            assert_eq!(ab, ba);
            assert!(ab.is_consistent(1e-12), "{ab:?}");
        }
    }

    #[test]
    fn invariant_under_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let k = rng.random_range(1..=10);
            let a = random_distribution(&mut rng, k, 1.0);
            let b = random_distribution(&mut rng, k, 1.0);
            let coarse_a = BinnedDistribution::bins(0.0, 1.0, a.masses().to_vec()).unwrap();
            let coarse_b = BinnedDistribution::bins(0.0, 1.0, b.masses().to_vec()).unwrap();
            let fine = BinnedDistribution::uniform_bins(0.0, 1.0, 3 * k).unwrap();
            let (fa, _) = align_supports(&coarse_a, &fine).unwrap();
            let (fb, _) = align_supports(&coarse_b, &fine).unwrap();
            let c = DivergenceReport::compute(&coarse_a, &coarse_b).unwrap();
            let f = DivergenceReport::compute(&fa, &fb).unwrap();
            assert!((c.hellinger_sq - f.hellinger_sq).abs() < 1e-12);
            assert!((c.bhattacharyya - f.bhattacharyya).abs() < 1e-12);
            assert!((c.tv - f.tv).abs() < 1e-12);
            assert!((c.sym_chi_sq - f.sym_chi_sq).abs() < 1e-12);
        }
    }
}
