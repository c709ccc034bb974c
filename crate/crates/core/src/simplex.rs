//! Probability-simplex primitives: logits, distributions, softmax, and the
//! collision / Rényi / Shannon entropy family. All entropies are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};

/// Absolute tolerance on `sum(p) == 1` for a stored distribution.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Inputs whose sum is off by at most this much are renormalized; larger
/// deviations are rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// Half-width of the excluded band around `alpha = 1` for [`renyi_entropy`].
pub const RENYI_ALPHA_GUARD: f64 = 1e-9;

/// Raw pre-softmax action scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Logits(Vec<f64>);

impl Logits {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "logits need at least 2 entries, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "logit {i} is not finite ({v})"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2 && values.iter().all(|v| v.is_finite()));
        Self(values)
    }
}

impl TryFrom<Vec<f64>> for Logits {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Logits> for Vec<f64> {
    fn from(z: Logits) -> Self {
        z.0
    }
}

/// A point on the probability simplex over `n >= 2` actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    /// Validates `probs`, renormalizing if the sum is within
    /// [`RENORMALIZE_TOL`] of one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a distribution needs at least 2 entries, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "probability {i} is {p}; entries must be finite and >= 0"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        let deviation = (total - 1.0).abs();
        if deviation > RENORMALIZE_TOL {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {total}, off by {deviation:e}"
            )));
        }
        if deviation > 0.0 {
            return Ok(Self(probs.into_iter().map(|p| p / total).collect()));
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid_param(
                "n",
                format!("need at least 2 actions, got {n}"),
            ));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// All mass on action `k`.
    pub fn deterministic(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid_param(
                "n",
                format!("need at least 2 actions, got {n}"),
            ));
        }
        if k >= n {
            return Err(Error::Index { index: k, n });
        }
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        Ok(Self(probs))
    }

    /// The two-point distribution `[p, 1 - p]`.
    pub fn two_point(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid_param("p", format!("{p} is outside [0, 1]")));
        }
        Ok(Self(vec![p, 1.0 - p]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.0.get(i).copied()
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.0.len() {
            return Err(Error::Index {
                index: i,
                n: self.0.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for ProbDist {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

/// Collision probability, Rényi-2 entropy and Shannon entropy of one distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub collision: f64,
    pub renyi2: f64,
    pub shannon: f64,
}

/// `P_i = exp(z_i) / sum_k exp(z_k)`, evaluated after subtracting `max z`.
pub fn softmax(z: &Logits) -> ProbDist {
    let max = z.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.0.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    ProbDist(exps.into_iter().map(|e| e / total).collect())
}

/// `C(P) = sum_i p_i^2`, the chance two independent draws from `P` coincide.
pub fn collision_probability(p: &ProbDist) -> f64 {
    p.0.iter().map(|&x| x * x).sum()
}

/// `H_alpha(P) = ln(sum_i p_i^alpha) / (1 - alpha)` for `alpha > 0`, `alpha != 1`.
///
/// Zero-probability entries are skipped (`0^alpha := 0`). For the `alpha -> 1`
/// limit use [`shannon_entropy`].
pub fn renyi_entropy(p: &ProbDist, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(invalid_param(
            "alpha",
            format!("{alpha} must be finite and > 0"),
        ));
    }
    if (alpha - 1.0).abs() <= RENYI_ALPHA_GUARD {
        return Err(invalid_param(
            "alpha",
            format!("{alpha} is within {RENYI_ALPHA_GUARD:e} of 1; use shannon_entropy"),
        ));
    }
    let power_sum: f64 = if alpha == 2.0 {
        collision_probability(p)
    } else {
        p.0.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x.powf(alpha))
            .sum()
    };
    Ok(power_sum.ln() / (1.0 - alpha))
}

/// `H(P) = -sum_i p_i ln p_i`, with `0 ln 0 := 0`.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    let h: f64 = p.0.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    // A deterministic vector gives -1 * ln(1) = -0.0.
    h.max(0.0)
}

pub fn entropy_report(p: &ProbDist) -> EntropyReport {
    let collision = collision_probability(p);
    let renyi2 = -collision.ln();
    let shannon = shannon_entropy(p);
    debug_assert!(renyi2 <= shannon + 1e-12);
    debug_assert!(collision >= (-shannon).exp() - 1e-12);
    EntropyReport {
        collision,
        renyi2,
        shannon,
    }
}
