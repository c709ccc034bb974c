//! Logit-level dynamics of softmax policy gradients.
//!
//! A single experience (chosen action `c`, advantage `A`, learning rate `eta`)
//! moves the logits by `eta * A * (delta_cj - P_j)`. The update is zero-sum,
//! and its L2 norm has the closed form `eta * |A| * sqrt(1 - 2 P_c + C(P))`
//! where `C(P) = sum_a P_a^2` is the collision probability.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`simplex`] | logits, probability vectors, softmax, collision probability, Rényi/Shannon entropy |
//! | [`update`] | score vector, update vector, closed-form magnitude, sensitivity factor |
//! | [`oracle`] | finite differences, brute-force norms, Monte-Carlo collision estimates |
//! | [`bandit`] | seeded multi-armed bandit simulator and sensitivity sweeps |
//! | [`cli`] | the `logitdyn` command-line front end |
//!
//! ```
//! use logitdyn::{softmax, update_magnitude, update_vector, Experience, Logits};
//!
//! let p = softmax(&Logits::new(vec![0.0, 0.0, 0.0, 0.0]).unwrap());
//! let e = Experience::new(2, 1.0, 1.0).unwrap();
//! let u = update_vector(&p, &e).unwrap();
//! assert!(u.sum().abs() < 1e-15);
//! assert!((update_magnitude(&p, &e).unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
//! ```

pub mod bandit;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod simplex;
pub mod update;

pub use error::{Error, Result};
pub use simplex::{
    collision_probability, entropy_report, renyi_entropy, shannon_entropy, softmax, EntropyReport,
    Logits, ProbDist,
};
pub use update::{
    apply_update, score_vector, sensitivity_factor, update_magnitude, update_vector, Experience,
    UpdateVector,
};
