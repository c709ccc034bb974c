//! Logit updates produced by a single experience under a softmax policy.
//!
//! The score of the chosen action with respect to logit `j` is
//! `delta_cj - P_j`; the update is that score scaled by `eta * A`. The
//! entries of every update sum to zero, and the update's L2 norm is
//! `eta * |A| * sqrt(1 - 2 P_c + C(P))`.

use crate::error::{invalid_param, Error, Result};
use crate::simplex::{Logits, ProbDist};

/// Radicands in `(-RADICAND_CLAMP, 0)` are treated as round-off and clamped to 0.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// Relative tolerance for the zero-sum check on an [`UpdateVector`].
pub const CONSERVATION_TOL: f64 = 1e-12;

/// One experience: which action was taken, its advantage, and the step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experience {
    pub chosen: usize,
    pub advantage: f64,
    pub learning_rate: f64,
}

impl Experience {
    pub fn new(chosen: usize, advantage: f64, learning_rate: f64) -> Result<Self> {
        if !advantage.is_finite() {
            return Err(invalid_param(
                "advantage",
                format!("{advantage} is not finite"),
            ));
        }
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(invalid_param(
                "learning_rate",
                format!("{learning_rate} must be finite and > 0"),
            ));
        }
        Ok(Self {
            chosen,
            advantage,
            learning_rate,
        })
    }

    fn scale(&self) -> f64 {
        self.learning_rate * self.advantage
    }
}

/// Logit increments `Delta z_j`. The entries sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateVector(Vec<f64>);

impl UpdateVector {
    /// Wraps explicit deltas, rejecting vectors that are not zero-sum.
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if let Some(v) = deltas.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("delta {v} is not finite")));
        }
        let sum: f64 = deltas.iter().sum();
        let scale = deltas.iter().fold(1.0f64, |m, d| m.max(d.abs()));
        if sum.abs() > CONSERVATION_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "update entries sum to {sum:e}; logit updates must be zero-sum"
            )));
        }
        Ok(Self(deltas))
    }

    pub fn deltas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

/// Gradient of `ln P_chosen` with respect to every logit: `delta_cj - P_j`.
pub fn score_vector(p: &ProbDist, chosen: usize) -> Result<Vec<f64>> {
    p.check_index(chosen)?;
    Ok(p.probs()
        .iter()
        .enumerate()
        .map(|(j, &pj)| if j == chosen { 1.0 - pj } else { -pj })
        .collect())
}

/// `Delta z = eta * A * score_vector(P, c)`.
pub fn update_vector(p: &ProbDist, e: &Experience) -> Result<UpdateVector> {
    let scale = e.scale();
    let deltas = score_vector(p, e.chosen)?
        .into_iter()
        .map(|s| scale * s)
        .collect();
    Ok(UpdateVector(deltas))
}

/// Closed-form L2 norm of the update: `eta * |A| * sqrt(1 - 2 P_c + C(P))`.
pub fn update_magnitude(p: &ProbDist, e: &Experience) -> Result<f64> {
    Ok(e.learning_rate * e.advantage.abs() * sensitivity_factor(p, e.chosen)?)
}

/// `sqrt(1 - 2 P_c + C(P))`, the policy-dependent part of the update norm.
/// Lies in `[0, sqrt 2)`.
pub fn sensitivity_factor(p: &ProbDist, chosen: usize) -> Result<f64> {
    p.check_index(chosen)?;
    let radicand = sensitivity_radicand(p.probs(), chosen);
    if radicand < -RADICAND_CLAMP {
        return Err(Error::Internal(format!(
            "sensitivity radicand {radicand:e} is negative beyond round-off"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `1 - 2 P_c + sum_a P_a^2` in double-double arithmetic.
///
/// Near `P_c = 1` the three terms cancel to something of order `(1 - P_c)^2`,
/// so plain `f64` evaluation loses most of its significant digits.
fn sensitivity_radicand(probs: &[f64], chosen: usize) -> f64 {
    let mut acc = DoubleDouble::from(1.0);
    let pc = probs[chosen];
    acc = acc.add_f64(-2.0 * pc);
    for &x in probs {
        acc = acc.add(DoubleDouble::product(x, x));
    }
    acc.hi + acc.lo
}

#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl DoubleDouble {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    fn product(a: f64, b: f64) -> Self {
        let hi = a * b;
        let lo = a.mul_add(b, -hi);
        Self { hi, lo }
    }

    fn add_f64(self, b: f64) -> Self {
        let (s, e) = Self::two_sum(self.hi, b);
        let (hi, lo) = Self::two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    fn add(self, other: Self) -> Self {
        let (s, e) = Self::two_sum(self.hi, other.hi);
        let (hi, lo) = Self::two_sum(s, e + self.lo + other.lo);
        Self { hi, lo }
    }
}

/// Adds `u` to `z` entrywise.
pub fn apply_update(z: &Logits, u: &UpdateVector) -> Result<Logits> {
    if z.len() != u.len() {
        return Err(Error::Shape {
            expected: z.len(),
            got: u.len(),
        });
    }
    let values: Vec<f64> = z
        .values()
        .iter()
        .zip(u.deltas())
        .map(|(a, b)| a + b)
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("logit overflowed after update".into()));
    }
    Ok(Logits::from_finite(values))
}
