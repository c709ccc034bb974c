//! Fixed-seed verification suites. Each check reports its worst error
//! against a pinned threshold and, on failure, the offending instance.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    brute_force_magnitude, entropy_ordering_check, grad_check, mc_collision_estimate,
    mc_standard_error, random_logits, renyi_limit_check, sample_simplex, seeded_rng,
    DEFAULT_FD_STEP,
};
use crate::error::Result;
use crate::simplex::{collision_probability, renyi_entropy, shannon_entropy, softmax, ProbDist};
use crate::update::{update_magnitude, update_vector, Experience};

pub const GRADIENT_TOL: f64 = 1e-6;
pub const CONSERVATION_REL_TOL: f64 = 1e-12;
pub const MAGNITUDE_REL_TOL: f64 = 1e-10;
pub const ENTROPY_TOL: f64 = 1e-12;
pub const RENYI_LIMIT_TOL: f64 = 1e-3;
pub const MC_ABS_TOL: f64 = 0.002;

pub const GRADIENT_SIZES: [usize; 4] = [2, 3, 10, 100];
pub const GRADIENT_VECTORS_PER_SIZE: usize = 100;
pub const RANDOM_INSTANCES: usize = 10_000;
pub const MAX_SIMPLEX_N: usize = 1_000;
pub const MC_PAIRS: u64 = 1_000_000;
pub const RENYI_LIMIT_ALPHAS: [f64; 4] = [1.5, 1.1, 1.01, 1.001];

const SEED_GRADIENTS: u64 = 0x6772_6164;
const SEED_MAGNITUDE: u64 = 0x6d61_676e;
const SEED_ENTROPY: u64 = 0x656e_7472;
const SEED_MC: u64 = 0x6d63;

/// The suites exposed by `logitdyn verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gradients,
    Magnitude,
    Entropy,
    Mc,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Gradients,
        Suite::Magnitude,
        Suite::Entropy,
        Suite::Mc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gradients => "gradients",
            Suite::Magnitude => "magnitude",
            Suite::Entropy => "entropy",
            Suite::Mc => "mc",
        }
    }

    pub fn run(self) -> Result<Vec<CheckOutcome>> {
        match self {
            Suite::Gradients => Ok(vec![gradient_check()?]),
            Suite::Magnitude => Ok(vec![conservation_check()?, magnitude_equivalence_check()?]),
            Suite::Entropy => Ok(vec![
                collision_bounds_check()?,
                ordering_check()?,
                uniform_equality_check()?,
                renyi_identity_check()?,
                renyi_monotone_check()?,
                renyi_limit_suite_check()?,
            ]),
            Suite::Mc => Ok(vec![
                mc_two_point_check()?,
                mc_uniform_check()?,
                mc_determinism_check()?,
            ]),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub threshold: f64,
    pub passed: bool,
    pub seed: Option<u64>,
    pub failing_instance: Option<Value>,
}

/// Tracks the worst error seen and the instance that produced it.
struct Worst {
    error: f64,
    instance: Option<Value>,
    violations: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            error: 0.0,
            instance: None,
            violations: 0,
        }
    }

    fn observe(&mut self, error: f64, threshold: f64, instance: impl FnOnce() -> Value) {
        let bad = error.is_nan() || error > threshold;
        if bad {
            self.violations += 1;
        }
        if error > self.error || error.is_nan() {
            self.error = error;
            if bad {
                self.instance = Some(instance());
            }
        }
    }

    fn finish(
        self,
        suite: Suite,
        name: &'static str,
        instances: usize,
        threshold: f64,
        seed: Option<u64>,
    ) -> CheckOutcome {
        CheckOutcome {
            suite: suite.name(),
            name,
            instances,
            max_error: self.error,
            threshold,
            passed: self.violations == 0,
            seed,
            failing_instance: self.instance,
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Random `(P, experience)` instances: half flat-Dirichlet, half softmax of
/// wide logits so that sharply concentrated policies are covered.
fn random_instance<R: Rng>(rng: &mut R) -> Result<(ProbDist, Experience)> {
    let n = rng.gen_range(2..=50);
    let p = if rng.gen_bool(0.5) {
        sample_simplex(rng, n)?
    } else {
        softmax(&random_logits(rng, n, 6.0)?)
    };
    let chosen = rng.gen_range(0..n);
    let advantage = rng.gen_range(-10.0..10.0);
    let learning_rate = rng.gen_range(1e-4..=1.0);
    Ok((p, Experience::new(chosen, advantage, learning_rate)?))
}

fn instance_json(p: &ProbDist, e: &Experience) -> Value {
    json!({
        "probs": p.probs(),
        "chosen": e.chosen,
        "advantage": e.advantage,
        "learning_rate": e.learning_rate,
    })
}

/// Simplex sizes spread log-uniformly over `[2, MAX_SIMPLEX_N]`.
fn random_simplex_size<R: Rng>(rng: &mut R) -> usize {
    let log_max = (MAX_SIMPLEX_N as f64).ln();
    let n = rng.gen_range(2f64.ln()..=log_max).exp().round() as usize;
    n.clamp(2, MAX_SIMPLEX_N)
}

pub fn gradient_check() -> Result<CheckOutcome> {
    let mut rng = seeded_rng(SEED_GRADIENTS);
    let mut worst = Worst::new();
    let mut count = 0;
    for n in GRADIENT_SIZES {
        for _ in 0..GRADIENT_VECTORS_PER_SIZE {
            let z = random_logits(&mut rng, n, 2.0)?;
            let report = grad_check(&z, DEFAULT_FD_STEP)?;
            worst.observe(
                report.max_abs_err,
                GRADIENT_TOL,
                || json!({ "logits": z.values(), "report": report }),
            );
            count += 1;
        }
    }
    Ok(worst.finish(
        Suite::Gradients,
        "score_vs_central_difference",
        count,
        GRADIENT_TOL,
        Some(SEED_GRADIENTS),
    ))
}

pub fn conservation_check() -> Result<CheckOutcome> {
    let mut rng = seeded_rng(SEED_MAGNITUDE);
    let mut worst = Worst::new();
    for _ in 0..RANDOM_INSTANCES {
        let (p, e) = random_instance(&mut rng)?;
        let u = update_vector(&p, &e)?;
        let err = u.sum().abs() / u.max_abs().max(1.0);
        worst.observe(err, CONSERVATION_REL_TOL, || instance_json(&p, &e));
    }
    Ok(worst.finish(
        Suite::Magnitude,
        "update_sum_is_zero",
        RANDOM_INSTANCES,
        CONSERVATION_REL_TOL,
        Some(SEED_MAGNITUDE),
    ))
}

pub fn magnitude_equivalence_check() -> Result<CheckOutcome> {
    let seed = SEED_MAGNITUDE ^ 1;
    let mut rng = seeded_rng(seed);
    let mut worst = Worst::new();
    for _ in 0..RANDOM_INSTANCES {
        let (p, e) = random_instance(&mut rng)?;
        let err = rel_err(update_magnitude(&p, &e)?, brute_force_magnitude(&p, &e)?);
        worst.observe(err, MAGNITUDE_REL_TOL, || instance_json(&p, &e));
    }
    Ok(worst.finish(
        Suite::Magnitude,
        "closed_form_vs_brute_force_norm",
        RANDOM_INSTANCES,
        MAGNITUDE_REL_TOL,
        Some(seed),
    ))
}

pub fn collision_bounds_check() -> Result<CheckOutcome> {
    let mut rng = seeded_rng(SEED_ENTROPY);
    let mut worst = Worst::new();
    for _ in 0..RANDOM_INSTANCES {
        let n = random_simplex_size(&mut rng);
        let p = sample_simplex(&mut rng, n)?;
        let c = collision_probability(&p);
        let below = (1.0 / n as f64 - c).max(0.0);
        let above = (c - 1.0).max(0.0);
        worst.observe(
            below.max(above),
            ENTROPY_TOL,
            || json!({ "probs": p.probs() }),
        );
    }
    Ok(worst.finish(
        Suite::Entropy,
        "collision_in_one_over_n_to_one",
        RANDOM_INSTANCES,
        ENTROPY_TOL,
        Some(SEED_ENTROPY),
    ))
}

pub fn ordering_check() -> Result<CheckOutcome> {
    let seed = SEED_ENTROPY ^ 1;
    let mut rng = seeded_rng(seed);
    let mut worst = Worst::new();
    for _ in 0..RANDOM_INSTANCES {
        let n = random_simplex_size(&mut rng);
        let p = sample_simplex(&mut rng, n)?;
        let c = collision_probability(&p);
        let h = shannon_entropy(&p);
        // Positive parts of the two violations; zero when the theorem holds.
        let excess = (-c.ln() - h).max((-h).exp() - c).max(0.0);
        let err = if entropy_ordering_check(&p) {
            excess
        } else {
            f64::INFINITY
        };
        worst.observe(err, ENTROPY_TOL, || json!({ "probs": p.probs() }));
    }
    Ok(worst.finish(
        Suite::Entropy,
        "renyi2_le_shannon_and_collision_ge_exp_neg_shannon",
        RANDOM_INSTANCES,
        ENTROPY_TOL,
        Some(seed),
    ))
}

pub fn uniform_equality_check() -> Result<CheckOutcome> {
    let mut worst = Worst::new();
    let sizes = [2usize, 3, 4, 5, 10, 100, 1000];
    for n in sizes {
        let p = ProbDist::uniform(n)?;
        let c = collision_probability(&p);
        let h = shannon_entropy(&p);
        let err = (-c.ln() - h).abs().max((c - (-h).exp()).abs());
        worst.observe(err, ENTROPY_TOL, || json!({ "uniform_n": n }));
    }
    Ok(worst.finish(
        Suite::Entropy,
        "ordering_equality_at_uniform",
        sizes.len(),
        ENTROPY_TOL,
        None,
    ))
}

pub fn renyi_identity_check() -> Result<CheckOutcome> {
    let seed = SEED_ENTROPY ^ 2;
    let mut rng = seeded_rng(seed);
    let mut worst = Worst::new();
    let count = 1_000;
    for _ in 0..count {
        let n = random_simplex_size(&mut rng);
        let p = sample_simplex(&mut rng, n)?;
        let err = (renyi_entropy(&p, 2.0)? + collision_probability(&p).ln()).abs();
        worst.observe(err, ENTROPY_TOL, || json!({ "probs": p.probs() }));
    }
    Ok(worst.finish(
        Suite::Entropy,
        "renyi2_equals_neg_ln_collision",
        count,
        ENTROPY_TOL,
        Some(seed),
    ))
}

pub fn renyi_monotone_check() -> Result<CheckOutcome> {
    const TOL: f64 = 1e-10;
    let alphas = [0.25, 0.5, 0.9, 1.1, 1.5, 2.0, 3.0, 10.0];
    let seed = SEED_ENTROPY ^ 3;
    let mut rng = seeded_rng(seed);
    let mut worst = Worst::new();
    let count = 1_000;
    for _ in 0..count {
        let n = rng.gen_range(2..=20);
        let p = sample_simplex(&mut rng, n)?;
        let hs = alphas
            .iter()
            .map(|&a| renyi_entropy(&p, a))
            .collect::<Result<Vec<_>>>()?;
        let rise = hs.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
        worst.observe(
            rise,
            TOL,
            || json!({ "probs": p.probs(), "alphas": alphas }),
        );
    }
    Ok(worst.finish(
        Suite::Entropy,
        "renyi_non_increasing_in_alpha",
        count,
        TOL,
        Some(seed),
    ))
}

/// `|H_alpha - H|` strictly shrinks along [`RENYI_LIMIT_ALPHAS`] for
/// `P = (0.5, 0.25, 0.25)` and ends below [`RENYI_LIMIT_TOL`].
pub fn renyi_limit_suite_check() -> Result<CheckOutcome> {
    let p = ProbDist::new(vec![0.5, 0.25, 0.25])?;
    let errs = renyi_limit_check(&p, &RENYI_LIMIT_ALPHAS)?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().expect("non-empty alpha list");
    let mut worst = Worst::new();
    let err = if decreasing { last } else { f64::INFINITY };
    worst.observe(
        err,
        RENYI_LIMIT_TOL,
        || json!({ "probs": p.probs(), "alphas": RENYI_LIMIT_ALPHAS, "errors": errs }),
    );
    Ok(worst.finish(
        Suite::Entropy,
        "renyi_to_shannon_limit",
        RENYI_LIMIT_ALPHAS.len(),
        RENYI_LIMIT_TOL,
        None,
    ))
}

pub fn mc_two_point_check() -> Result<CheckOutcome> {
    let p = ProbDist::two_point(0.9)?;
    mc_against_exact(p, "two_point_0_9", SEED_MC)
}

pub fn mc_uniform_check() -> Result<CheckOutcome> {
    mc_against_exact(ProbDist::uniform(2)?, "uniform_2", SEED_MC ^ 1)
}

fn mc_against_exact(p: ProbDist, name: &'static str, seed: u64) -> Result<CheckOutcome> {
    let exact = collision_probability(&p);
    let est = mc_collision_estimate(&p, MC_PAIRS, seed)?;
    let mut worst = Worst::new();
    worst.observe((est - exact).abs(), MC_ABS_TOL, || {
        json!({
            "probs": p.probs(),
            "pairs": MC_PAIRS,
            "seed": seed,
            "estimate": est,
            "exact": exact,
            "standard_error": mc_standard_error(exact, MC_PAIRS),
        })
    });
    Ok(worst.finish(Suite::Mc, name, 1, MC_ABS_TOL, Some(seed)))
}

pub fn mc_determinism_check() -> Result<CheckOutcome> {
    let p = ProbDist::new(vec![0.5, 0.3, 0.2])?;
    let a = mc_collision_estimate(&p, 100_000, SEED_MC)?;
    let b = mc_collision_estimate(&p, 100_000, SEED_MC)?;
    let mut worst = Worst::new();
    let err = if a.to_bits() == b.to_bits() {
        0.0
    } else {
        f64::INFINITY
    };
    worst.observe(
        err,
        0.0,
        || json!({ "first": a, "second": b, "seed": SEED_MC }),
    );
    Ok(worst.finish(Suite::Mc, "same_seed_same_estimate", 2, 0.0, Some(SEED_MC)))
}
