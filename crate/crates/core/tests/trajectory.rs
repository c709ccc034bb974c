use logitdyn::bandit::{run, AdvantageMode, BanditEnv, Baseline, InitialLogits, SimConfig};
use logitdyn::Logits;

fn two_arm_exact() -> (BanditEnv, SimConfig) {
    (
        BanditEnv::new(vec![1.0, 0.0], 0.0, AdvantageMode::ExactAdvantage).unwrap(),
        SimConfig::new(2_000, 0.1, 1),
    )
}

#[test]
fn logit_sum_drift_over_long_runs() {
    let env = BanditEnv::new(vec![0.1, 0.7, 0.4, 0.2], 0.3, AdvantageMode::SampledReward).unwrap();
    let mut cfg = SimConfig::new(100_000, 0.05, 17);
    cfg.baseline = Baseline::RunningMean;
    cfg.initial_logits = InitialLogits::Values(Logits::new(vec![0.5, -0.25, 1.0, 0.0]).unwrap());
    let out = run(&env, &cfg).unwrap();
    let drift = (out.final_logits.sum() - 1.25).abs();
    assert!(drift <= 1e-9, "drift {drift:e}");
}

#[test]
fn best_arm_probability_never_drops_when_chosen() {
    let env = BanditEnv::new(vec![0.2, 1.0, 0.5], 0.0, AdvantageMode::ExactAdvantage).unwrap();
    let mut cfg = SimConfig::new(3_000, 0.2, 5);
    cfg.snapshot_logits = true;
    let out = run(&env, &cfg).unwrap();
    for r in &out.records {
        if r.chosen != 1 {
            continue;
        }
        let after = logitdyn::softmax(&Logits::new(r.logits_snapshot.clone().unwrap()).unwrap());
        assert!(after.probs()[1] >= r.p_chosen, "step {}", r.step);
    }
}

#[test]
fn update_norms_decay_as_policy_concentrates() {
    let (env, cfg) = two_arm_exact();
    let out = run(&env, &cfg).unwrap();
    assert_eq!(out.records[0].collision, 0.5);
    assert!(out.final_collision >= 0.98);

    let n = out.records.len();
    let tenth = n / 10;
    let mut early: Vec<f64> = out.records[..tenth]
        .iter()
        .filter(|r| r.chosen == 0)
        .map(|r| r.update_norm)
        .collect();
    early.sort_by(f64::total_cmp);
    let median = early[early.len() / 2];
    let late = out.records[n - tenth..].iter().filter(|r| r.chosen == 0);
    for r in late {
        assert!(
            r.update_norm < median,
            "step {}: {} >= {median}",
            r.step,
            r.update_norm
        );
    }
}

#[test]
fn same_seed_runs_are_bitwise_identical() {
    let (env, cfg) = two_arm_exact();
    let a = run(&env, &cfg).unwrap().records;
    let b = run(&env, &cfg).unwrap().records;
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.chosen, y.chosen);
        assert_eq!(x.update_norm.to_bits(), y.update_norm.to_bits());
        assert_eq!(x.p_chosen.to_bits(), y.p_chosen.to_bits());
    }
    let mut other = cfg.clone();
    other.seed = 2;
    let c = run(&env, &other).unwrap().records;
    assert!(a.iter().zip(&c).any(|(x, y)| x.chosen != y.chosen));
}
