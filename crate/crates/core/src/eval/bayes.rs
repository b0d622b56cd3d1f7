//! Bayesian signed-rank test for comparing two classifiers over several
//! datasets.
//!
//! The observed per-dataset differences `z_1..z_q` are augmented with a
//! pseudo-observation `z_0` whose Dirichlet weight is the prior strength `s`.
//! Each Monte-Carlo draw samples `w ~ Dirichlet(s, 1, ..., 1)` and measures
//! how much pairwise-average mass falls left of, inside, or right of the
//! region of practical equivalence `[-rope, rope]`:
//!
//! ```text
//! theta_left  = sum_{i,j} w_i w_j [ (z_i + z_j) / 2 < -rope ]
//! theta_rope  = sum_{i,j} w_i w_j [ |z_i + z_j| / 2 <= rope ]
//! theta_right = sum_{i,j} w_i w_j [ (z_i + z_j) / 2 >  rope ]
//! ```
//!
//! The reported probability of a region is the fraction of draws in which
//! that region's mass is the largest, with ties shared equally.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedRankConfig {
    pub rope: f64,
    /// Dirichlet weight `s` of the prior pseudo-observation.
    pub prior_weight: f64,
    /// Value `z_0` of the prior pseudo-observation.
    pub prior_pseudo: f64,
    pub mc_samples: usize,
}

impl Default for SignedRankConfig {
    fn default() -> Self {
        SignedRankConfig {
            rope: 0.01,
            prior_weight: 0.5,
            prior_pseudo: 0.0,
            mc_samples: 50_000,
        }
    }
}

/// Posterior mass of the three regions for one Dirichlet draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSample {
    pub theta_left: f64,
    pub theta_rope: f64,
    pub theta_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedRankPosterior {
    pub p_left: f64,
    pub p_rope: f64,
    pub p_right: f64,
    pub samples: Vec<PosteriorSample>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Region {
    Left,
    Rope,
    Right,
}

/// Run the test on `differences` (method A minus method B, one per dataset).
/// `p_right` is the probability that A is practically better.
pub fn bayesian_signed_rank<R: Rng + ?Sized>(
    differences: &[f64],
    config: &SignedRankConfig,
    rng: &mut R,
) -> Result<SignedRankPosterior> {
    if differences.is_empty() {
        return Err(Error::domain(
            "signed-rank test needs at least one difference",
        ));
    }
    if differences.iter().any(|d| !d.is_finite()) || !config.prior_pseudo.is_finite() {
        return Err(Error::domain("differences must be finite"));
    }
    if config.rope.is_nan() || config.rope < 0.0 {
        return Err(Error::domain("rope radius must be non-negative"));
    }
    if config.prior_weight.is_nan() || config.prior_weight <= 0.0 {
        return Err(Error::domain("prior weight must be positive"));
    }
    if config.mc_samples == 0 {
        return Err(Error::domain("mc_samples must be at least 1"));
    }

    let z: Vec<f64> = std::iter::once(config.prior_pseudo)
        .chain(differences.iter().copied())
        .collect();
    let k = z.len();
    let regions: Vec<Region> = z
        .iter()
        .flat_map(|&zi| z.iter().map(move |&zj| (zi + zj) / 2.0))
        .map(|avg| {
            if avg < -config.rope {
                Region::Left
            } else if avg > config.rope {
                Region::Right
            } else {
                Region::Rope
            }
        })
        .collect();

    let prior = Gamma::new(config.prior_weight, 1.0)
        .map_err(|e| Error::domain(format!("invalid prior weight: {e}")))?;
    let unit = Gamma::new(1.0, 1.0).expect("shape 1 is valid");

    // Wins are counted in sixths so that two- and three-way ties split exactly.
    let mut wins = [0u64; 3];
    let mut samples = Vec::with_capacity(config.mc_samples);
    let mut w = vec![0.0; k];
    for _ in 0..config.mc_samples {
        w[0] = prior.sample(rng);
        for wi in w.iter_mut().skip(1) {
            *wi = unit.sample(rng);
        }
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|wi| *wi /= total);
        } else {
            // every gamma draw underflowed; fall back to the prior's point mass
            w.iter_mut().for_each(|wi| *wi = 0.0);
            w[0] = 1.0;
        }

        let mut theta = [0.0; 3];
        for i in 0..k {
            let mut row = [0.0; 3];
            for j in 0..k {
                let slot = match regions[i * k + j] {
                    Region::Left => 0,
                    Region::Rope => 1,
                    Region::Right => 2,
                };
                row[slot] += w[j];
            }
            for (t, r) in theta.iter_mut().zip(row) {
                *t += w[i] * r;
            }
        }

        let best = theta.iter().copied().fold(f64::MIN, f64::max);
        let tied = theta.iter().filter(|&&t| t == best).count() as u64;
        for (slot, &t) in theta.iter().enumerate() {
            if t == best {
                wins[slot] += 6 / tied;
            }
        }
        samples.push(PosteriorSample {
            theta_left: theta[0],
            theta_rope: theta[1],
            theta_right: theta[2],
        });
    }

    let denom = 6.0 * config.mc_samples as f64;
    let p_left = wins[0] as f64 / denom;
    let p_rope = wins[1] as f64 / denom;
    let p_right = 1.0 - (p_left + p_rope);
    Ok(SignedRankPosterior {
        p_left,
        p_rope,
        p_right,
        samples,
    })
}
