//! Seeded multi-armed bandit driven by single-experience logit updates.
//!
//! Each step samples an action from `softmax(z)`, forms an advantage, applies
//! `eta * A * (delta_c - P)` to the logits and records the quantities that
//! govern the update size: `P_c`, `C(P)`, the two entropies and the norm.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::oracle::{seeded_rng, SeededRng};
use crate::simplex::{entropy_report, softmax, Logits, ProbDist};
use crate::update::{apply_update, update_vector, Experience};

/// How the advantage of a sampled action is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvantageMode {
    /// `A = mean[c] - average(mean)`. No reward noise, no baseline.
    ExactAdvantage,
    /// `A = reward - baseline` with `reward = mean[c] + noise`.
    SampledReward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    #[default]
    None,
    /// Mean of all rewards observed before the current step.
    RunningMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    arm_means: Vec<f64>,
    reward_noise_std: f64,
    mode: AdvantageMode,
}

impl BanditEnv {
    pub fn new(arm_means: Vec<f64>, reward_noise_std: f64, mode: AdvantageMode) -> Result<Self> {
        if arm_means.len() < 2 {
            return Err(invalid_param(
                "means",
                format!("need at least 2 arms, got {}", arm_means.len()),
            ));
        }
        if arm_means.iter().any(|m| !m.is_finite()) {
            return Err(invalid_param("means", "every arm mean must be finite"));
        }
        if !(reward_noise_std.is_finite() && reward_noise_std >= 0.0) {
            return Err(invalid_param(
                "noise_std",
                format!("{reward_noise_std} must be finite and >= 0"),
            ));
        }
        Ok(Self {
            arm_means,
            reward_noise_std,
            mode,
        })
    }

    pub fn arms(&self) -> usize {
        self.arm_means.len()
    }

    pub fn arm_means(&self) -> &[f64] {
        &self.arm_means
    }

    pub fn reward_noise_std(&self) -> f64 {
        self.reward_noise_std
    }

    pub fn mode(&self) -> AdvantageMode {
        self.mode
    }

    fn mean_over_arms(&self) -> f64 {
        self.arm_means.iter().sum::<f64>() / self.arm_means.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialLogits {
    Zeros,
    Values(Logits),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub steps: u64,
    pub learning_rate: f64,
    pub seed: u64,
    pub initial_logits: InitialLogits,
    pub baseline: Baseline,
    pub snapshot_logits: bool,
}

impl SimConfig {
    pub fn new(steps: u64, learning_rate: f64, seed: u64) -> Self {
        Self {
            steps,
            learning_rate,
            seed,
            initial_logits: InitialLogits::Zeros,
            baseline: Baseline::None,
            snapshot_logits: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(invalid_param("steps", "must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(invalid_param(
                "eta",
                format!(
                    "learning rate {} must be finite and > 0",
                    self.learning_rate
                ),
            ));
        }
        Ok(())
    }

    fn initial_logits(&self, arms: usize) -> Result<Logits> {
        match &self.initial_logits {
            InitialLogits::Zeros => Logits::zeros(arms),
            InitialLogits::Values(z) if z.len() == arms => Ok(z.clone()),
            InitialLogits::Values(z) => Err(Error::Shape {
                expected: arms,
                got: z.len(),
            }),
        }
    }
}

/// One step of the simulation. Probabilities and entropies are those of the
/// policy the action was sampled from, before the update.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub step: u64,
    pub chosen: usize,
    pub advantage: f64,
    pub p_chosen: f64,
    pub collision: f64,
    pub shannon: f64,
    pub renyi2: f64,
    /// L2 norm of the update actually applied.
    pub update_norm: f64,
    /// Logits after the update, when snapshots are enabled.
    pub logits_snapshot: Option<Vec<f64>>,
}

/// Mutable per-run state threaded through [`step`].
#[derive(Debug, Clone)]
pub struct SimState {
    rng: SeededRng,
    step: u64,
    reward_sum: f64,
    reward_count: u64,
}

impl SimState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: seeded_rng(seed),
            step: 0,
            reward_sum: 0.0,
            reward_count: 0,
        }
    }

    fn running_mean(&self) -> f64 {
        if self.reward_count == 0 {
            0.0
        } else {
            self.reward_sum / self.reward_count as f64
        }
    }
}

/// Samples an action, forms its advantage and applies one logit update.
pub fn step(
    env: &BanditEnv,
    z: &Logits,
    cfg: &SimConfig,
    state: &mut SimState,
) -> Result<(Logits, TrajectoryRecord)> {
    if z.len() != env.arms() {
        return Err(Error::Shape {
            expected: env.arms(),
            got: z.len(),
        });
    }
    let p = softmax(z);
    let sampler = WeightedIndex::new(p.probs())
        .map_err(|e| Error::Internal(format!("cannot sample policy: {e}")))?;
    let chosen = sampler.sample(&mut state.rng);

    let advantage = match env.mode {
        AdvantageMode::ExactAdvantage => env.arm_means[chosen] - env.mean_over_arms(),
        AdvantageMode::SampledReward => {
            let noise: f64 = state.rng.sample(StandardNormal);
            let reward = env.arm_means[chosen] + env.reward_noise_std * noise;
            let baseline = match cfg.baseline {
                Baseline::None => 0.0,
                Baseline::RunningMean => state.running_mean(),
            };
            state.reward_sum += reward;
            state.reward_count += 1;
            reward - baseline
        }
    };

    let experience = Experience::new(chosen, advantage, cfg.learning_rate)?;
    let update = update_vector(&p, &experience)?;
    let next = apply_update(z, &update)?;
    let report = entropy_report(&p);
    let record = TrajectoryRecord {
        step: state.step,
        chosen,
        advantage,
        p_chosen: p.probs()[chosen],
        collision: report.collision,
        shannon: report.shannon,
        renyi2: report.renyi2,
        update_norm: update.deltas().iter().map(|d| d * d).sum::<f64>().sqrt(),
        logits_snapshot: cfg.snapshot_logits.then(|| next.values().to_vec()),
    };
    state.step += 1;
    Ok((next, record))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TrajectoryRecord>,
    pub final_logits: Logits,
    pub final_probs: ProbDist,
    pub final_collision: f64,
}

/// Runs `cfg.steps` steps from the configured initial logits.
pub fn run(env: &BanditEnv, cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut z = cfg.initial_logits(env.arms())?;
    let mut state = SimState::new(cfg.seed);
    let mut records = Vec::with_capacity(usize::try_from(cfg.steps).unwrap_or(0));
    for _ in 0..cfg.steps {
        let (next, record) = step(env, &z, cfg, &mut state)?;
        z = next;
        records.push(record);
    }
    let final_probs = softmax(&z);
    let final_collision = crate::simplex::collision_probability(&final_probs);
    Ok(RunOutput {
        records,
        final_logits: z,
        final_probs,
        final_collision,
    })
}

/// One cell of the sensitivity surface. `sensitivity` is `None` when no
/// distribution has that `(P_c, C)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub p_chosen: f64,
    pub collision: f64,
    pub sensitivity: Option<f64>,
}

const FEASIBILITY_SLACK: f64 = 1e-12;

/// `P_c^2 <= C <= P_c^2 + (1 - P_c)^2` over distributions with any number
/// of actions. The lower end is approached as the remaining mass spreads
/// over ever more actions; the upper end puts it all on one action.
pub fn is_feasible(p_chosen: f64, collision: f64) -> bool {
    if !(0.0..=1.0).contains(&p_chosen) || !collision.is_finite() {
        return false;
    }
    let lo = p_chosen * p_chosen;
    let hi = lo + (1.0 - p_chosen) * (1.0 - p_chosen);
    collision >= lo - FEASIBILITY_SLACK && collision <= hi + FEASIBILITY_SLACK
}

/// `sqrt(1 - 2 P_c + C)` over the grid, `P_c` outer and `C` inner.
pub fn sweep_sensitivity(p_values: &[f64], collision_values: &[f64]) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(p_values.len() * collision_values.len());
    for &p_chosen in p_values {
        for &collision in collision_values {
            let sensitivity = is_feasible(p_chosen, collision)
                .then(|| (1.0 - 2.0 * p_chosen + collision).max(0.0).sqrt());
            cells.push(SweepCell {
                p_chosen,
                collision,
                sensitivity,
            });
        }
    }
    cells
}

/// `0, 0.1, ..., 1.0`.
pub fn default_sweep_axis() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_arm() -> BanditEnv {
        BanditEnv::new(vec![1.0, 0.0], 0.0, AdvantageMode::ExactAdvantage).unwrap()
    }

    #[test]
    fn env_validation() {
        assert!(BanditEnv::new(vec![1.0], 0.0, AdvantageMode::ExactAdvantage).is_err());
        assert!(BanditEnv::new(vec![1.0, f64::NAN], 0.0, AdvantageMode::ExactAdvantage).is_err());
        assert!(BanditEnv::new(vec![1.0, 0.0], -1.0, AdvantageMode::SampledReward).is_err());
    }

    #[test]
    fn config_validation_names_field() {
        let err = SimConfig::new(0, 0.1, 1).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "steps", .. }));
        let err = SimConfig::new(5, 0.0, 1).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "eta", .. }));
    }

    #[test]
    fn equal_means_leave_logits_unchanged() {
        let env = BanditEnv::new(vec![0.3; 4], 0.0, AdvantageMode::ExactAdvantage).unwrap();
        let cfg = SimConfig::new(50, 0.5, 9);
        let out = run(&env, &cfg).unwrap();
        assert!(out
            .records
            .iter()
            .all(|r| r.advantage == 0.0 && r.update_norm == 0.0));
        assert_eq!(out.final_logits.values(), &[0.0; 4]);
    }

    #[test]
    fn first_step_hand_evaluation() {
        let env = two_arm();
        let cfg = SimConfig::new(1, 0.1, 1);
        let mut state = SimState::new(1);
        let (z, r) = step(&env, &Logits::zeros(2).unwrap(), &cfg, &mut state).unwrap();
        assert_eq!(r.chosen, 0, "seed 1 must pick arm 0 first");
        assert_eq!(r.advantage, 0.5);
        assert!((z.values()[0] - 0.025).abs() < 1e-15);
        assert!((z.values()[1] + 0.025).abs() < 1e-15);
        let p0 = softmax(&z).probs()[0];
        assert!((p0 - 1.0 / (1.0 + (-0.05f64).exp())).abs() < 1e-15);
        assert!((p0 - 0.512_497_396_484_210_3).abs() < 1e-12);
    }

    #[test]
    fn step_rejects_arity_mismatch() {
        let env = two_arm();
        let cfg = SimConfig::new(1, 0.1, 0);
        let mut state = SimState::new(0);
        assert!(matches!(
            step(&env, &Logits::zeros(3).unwrap(), &cfg, &mut state),
            Err(Error::Shape { .. })
        ));
        let mut cfg = cfg;
        cfg.initial_logits = InitialLogits::Values(Logits::zeros(3).unwrap());
        assert!(matches!(run(&env, &cfg), Err(Error::Shape { .. })));
    }

    #[test]
    fn records_satisfy_magnitude_formula() {
        let env = BanditEnv::new(vec![0.2, 0.9, 0.5], 0.3, AdvantageMode::SampledReward).unwrap();
        let mut cfg = SimConfig::new(500, 0.2, 4);
        cfg.baseline = Baseline::RunningMean;
        for r in run(&env, &cfg).unwrap().records {
            let radicand = 1.0 - 2.0 * r.p_chosen + r.collision;
            let closed = cfg.learning_rate * r.advantage.abs() * radicand.max(0.0).sqrt();
            let scale = closed.abs().max(r.update_norm.abs());
            assert!(scale == 0.0 || (closed - r.update_norm).abs() / scale <= 1e-10);
        }
    }

    #[test]
    fn running_mean_baseline_uses_prior_rewards() {
        let env = BanditEnv::new(vec![2.0, 2.0], 0.0, AdvantageMode::SampledReward).unwrap();
        let mut cfg = SimConfig::new(3, 0.1, 1);
        cfg.baseline = Baseline::RunningMean;
        let adv: Vec<f64> = run(&env, &cfg)
            .unwrap()
            .records
            .iter()
            .map(|r| r.advantage)
            .collect();
        assert_eq!(adv, vec![2.0, 0.0, 0.0]);
        cfg.baseline = Baseline::None;
        let adv: Vec<f64> = run(&env, &cfg)
            .unwrap()
            .records
            .iter()
            .map(|r| r.advantage)
            .collect();
        assert_eq!(adv, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn snapshots_follow_config() {
        let env = two_arm();
        let mut cfg = SimConfig::new(3, 0.1, 2);
        assert!(run(&env, &cfg)
            .unwrap()
            .records
            .iter()
            .all(|r| r.logits_snapshot.is_none()));
        cfg.snapshot_logits = true;
        let out = run(&env, &cfg).unwrap();
        assert_eq!(
            out.records.last().unwrap().logits_snapshot.as_deref(),
            Some(out.final_logits.values())
        );
    }

    #[test]
    fn sweep_examples() {
        let cells = sweep_sensitivity(&[0.0, 1.0, 0.5, 0.9], &[1.0, 0.5, 0.2]);
        let get = |p: f64, c: f64| {
            cells
                .iter()
                .find(|x| x.p_chosen == p && x.collision == c)
                .unwrap()
                .sensitivity
        };
        assert!((get(0.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(get(1.0, 1.0), Some(0.0));
        assert!((get(0.5, 0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(get(0.9, 0.2), None);
        assert_eq!(get(0.5, 1.0), None);
        assert_eq!(cells.len(), 12);
    }
}
