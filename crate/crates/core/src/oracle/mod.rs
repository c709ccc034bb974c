//! Independent numerical checks for the closed forms in [`crate::update`]
//! and [`crate::simplex`].
//!
//! Nothing here evaluates the magnitude formula or the score formula
//! directly: gradients come from central differences of a separately coded
//! log-softmax, norms from summing squared deltas, and collision
//! probabilities from sampling.

pub mod suite;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::error::{invalid_param, Error, Result};
use crate::simplex::{
    collision_probability, renyi_entropy, shannon_entropy, softmax, Logits, ProbDist,
};
use crate::update::{score_vector, update_vector, Experience};

/// Generator used by every seeded routine in this crate.
pub type SeededRng = ChaCha8Rng;

/// Recorded in manifests and verification output.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Largest accepted central-difference step.
pub const MAX_FD_STEP: f64 = 1e-2;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Worst disagreement between the analytic score and central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_abs_err: f64,
    /// `(i, j)`: log-probability of action `i`, derivative along logit `j`.
    pub worst_indices: (usize, usize),
    pub step_size: f64,
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= MAX_FD_STEP) {
        return Err(invalid_param(
            "step",
            format!("{step} must lie in (0, {MAX_FD_STEP}]"),
        ));
    }
    Ok(())
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln softmax(z)_i` after nudging logit `j` by `h`.
fn log_prob_shifted(z: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let mut shifted = z.to_vec();
    shifted[j] += h;
    shifted[i] - log_sum_exp(&shifted)
}

/// Central-difference estimate of `d ln pi_i / d z_j` for every `j`.
pub fn finite_diff_score(z: &Logits, i: usize, step: f64) -> Result<Vec<f64>> {
    check_step(step)?;
    if i >= z.len() {
        return Err(Error::Index {
            index: i,
            n: z.len(),
        });
    }
    let v = z.values();
    Ok((0..v.len())
        .map(|j| {
            (log_prob_shifted(v, i, j, step) - log_prob_shifted(v, i, j, -step)) / (2.0 * step)
        })
        .collect())
}

/// All rows of [`finite_diff_score`] at once.
///
/// The normalizer of a shifted logit vector does not depend on `i`, so each
/// column costs two log-sum-exp evaluations instead of `2n`.
pub fn finite_diff_jacobian(z: &Logits, step: f64) -> Result<Vec<Vec<f64>>> {
    check_step(step)?;
    let v = z.values();
    let n = v.len();
    let mut jac = vec![vec![0.0; n]; n];
    let mut shifted = v.to_vec();
    for j in 0..n {
        shifted[j] = v[j] + step;
        let lse_plus = log_sum_exp(&shifted);
        shifted[j] = v[j] - step;
        let lse_minus = log_sum_exp(&shifted);
        shifted[j] = v[j];
        for (i, row) in jac.iter_mut().enumerate() {
            let plus = if i == j { v[i] + step } else { v[i] } - lse_plus;
            let minus = if i == j { v[i] - step } else { v[i] } - lse_minus;
            row[j] = (plus - minus) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Compares `score_vector(softmax(z), i)` with central differences over all `(i, j)`.
pub fn grad_check(z: &Logits, step: f64) -> Result<GradCheckReport> {
    let jac = finite_diff_jacobian(z, step)?;
    let p = softmax(z);
    let mut report = GradCheckReport {
        max_abs_err: 0.0,
        worst_indices: (0, 0),
        step_size: step,
    };
    for (i, row) in jac.iter().enumerate() {
        let analytic = score_vector(&p, i)?;
        for (j, (fd, an)) in row.iter().zip(&analytic).enumerate() {
            let err = (fd - an).abs();
            if err > report.max_abs_err || err.is_nan() {
                report.max_abs_err = err;
                report.worst_indices = (i, j);
            }
        }
    }
    Ok(report)
}

/// `sqrt(sum_j Delta z_j^2)` summed from the explicit update vector.
pub fn brute_force_magnitude(p: &ProbDist, e: &Experience) -> Result<f64> {
    let u = update_vector(p, e)?;
    Ok(u.deltas().iter().map(|d| d * d).sum::<f64>().sqrt())
}

/// Fraction of `pairs` independent draw pairs from `p` that coincide.
pub fn mc_collision_estimate(p: &ProbDist, pairs: u64, seed: u64) -> Result<f64> {
    if pairs == 0 {
        return Err(invalid_param("pairs", "must be at least 1"));
    }
    let sampler = WeightedIndex::new(p.probs())
        .map_err(|e| Error::InvalidInput(format!("cannot sample distribution: {e}")))?;
    let mut rng = seeded_rng(seed);
    let hits = (0..pairs)
        .filter(|_| sampler.sample(&mut rng) == sampler.sample(&mut rng))
        .count();
    Ok(hits as f64 / pairs as f64)
}

/// Binomial standard error `sqrt(C (1 - C) / pairs)` of [`mc_collision_estimate`].
pub fn mc_standard_error(collision: f64, pairs: u64) -> f64 {
    (collision * (1.0 - collision) / pairs as f64).sqrt()
}

/// `|H_alpha(P) - H(P)|` for each `alpha`.
pub fn renyi_limit_check(p: &ProbDist, alphas: &[f64]) -> Result<Vec<f64>> {
    let shannon = shannon_entropy(p);
    alphas
        .iter()
        .map(|&a| renyi_entropy(p, a).map(|h| (h - shannon).abs()))
        .collect()
}

/// `H_2(P) <= H(P)` and `C(P) >= exp(-H(P))`, each with slack `1e-12`.
pub fn entropy_ordering_check(p: &ProbDist) -> bool {
    let c = collision_probability(p);
    let h2 = -c.ln();
    let h = shannon_entropy(p);
    h2 <= h + 1e-12 && c >= (-h).exp() - 1e-12
}

/// Flat-Dirichlet point: normalized independent `Exp(1)` draws.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<ProbDist> {
    if n < 2 {
        return Err(invalid_param(
            "n",
            format!("need at least 2 actions, got {n}"),
        ));
    }
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    ProbDist::new(draws.into_iter().map(|d| d / total).collect())
}

/// Logits with independent `N(0, scale^2)` entries.
pub fn random_logits<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Result<Logits> {
    Logits::new(
        (0..n)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}
