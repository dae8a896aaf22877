use super::*;
use crate::envs::{chain_optimal_q, make_task_suite, EnvKind, SuiteName};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn chain_spec(gamma: f64) -> EnvSpec {
    EnvSpec { id: "chain".into(), kind: EnvKind::TwoStateChain, gamma, horizon: 50 }
}

fn car_on_hill() -> EnvSpec {
    make_task_suite(SuiteName::CarOnHill8)[0].clone()
}

struct ConstPolicy(Action);

impl Policy for ConstPolicy {
    fn act(&self, _task: usize, _obs: &[f64]) -> Action {
        self.0.clone()
    }
}

/// Tabular Q for tests: a fixed closure.
struct FnQ<F: Fn(&[f64]) -> Vec<f64>>(F);

impl<F: Fn(&[f64]) -> Vec<f64>> QFunction for FnQ<F> {
    fn q_values(&self, _task: usize, obs: &[f64]) -> Vec<f64> {
        (self.0)(obs)
    }
}

#[test]
fn chain_oracle_matches_closed_form_to_1e9() {
    let gamma = 0.95;
    let oracle = build_q_oracle_with(&chain_spec(gamma), &[2], 1e-12, 50_000).unwrap();
    for s in [0.0, 1.0] {
        let expected = chain_optimal_q(s, gamma);
        for a in 0..2 {
            let got = oracle.q_value(&[s], a);
            assert!(
                (got - expected[a]).abs() < 1e-9,
                "Q({s},{a}) = {got}, closed form {}",
                expected[a]
            );
        }
    }
    assert!(oracle.table_residual() < 1e-9);
}

#[test]
fn residuals_contract_at_rate_gamma() {
    let oracle = build_q_oracle(&chain_spec(0.9), &[2]).unwrap();
    let r = &oracle.residual_history;
    // Skip the first sweeps where new rewards enter; after that the
    // Bellman operator is a γ-contraction.
    for w in r[2..].windows(2) {
        if w[0] > 1e-14 {
            assert!(w[1] <= 0.9 * w[0] + 1e-12, "residuals {} -> {}", w[0], w[1]);
        }
    }
    let coh = build_q_oracle(&car_on_hill(), &[120, 120]).unwrap();
    for w in coh.residual_history[5..].windows(2) {
        if w[0] > 1e-12 {
            assert!(w[1] <= 0.95 * w[0] + 1e-12);
        }
    }
}

#[test]
fn doubling_resolution_moves_probe_values_under_one_percent() {
    let spec = car_on_hill();
    let coarse = build_q_oracle(&spec, &[200, 200]).unwrap();
    let fine = build_q_oracle(&spec, &[400, 400]).unwrap();
    let probes = sample_probe_states(&spec, 100, &mut rng(60));
    let mut rel_sum = 0.0;
    let mut count = 0;
    for s in &probes {
        for a in 0..2 {
            let c = coarse.q_value(s, a);
            let f = fine.q_value(s, a);
            rel_sum += (c - f).abs() / f.abs().max(1.0);
            count += 1;
        }
    }
    let mean_rel = rel_sum / count as f64;
    assert!(mean_rel < 0.01, "mean relative change {mean_rel}");
}

#[test]
fn oracle_rejects_stochastic_and_continuous_tasks() {
    let noisy = make_task_suite(SuiteName::Mdqn5)[4].clone();
    assert!(matches!(build_q_oracle(&noisy, &[10, 10]), Err(OracleError::Stochastic(_))));
    let pendulum = make_task_suite(SuiteName::PendulumFamily3)[0].clone();
    assert!(matches!(
        build_q_oracle(&pendulum, &[10, 10]),
        Err(OracleError::ContinuousActions(_))
    ));
    assert!(matches!(
        build_q_oracle(&chain_spec(0.9), &[1]),
        Err(OracleError::BadResolution(_))
    ));
}

#[test]
fn q_l1_error_zero_against_itself_and_200_tuples() {
    let spec = car_on_hill();
    let oracle = build_q_oracle(&spec, &[100, 100]).unwrap();
    let probes = sample_probe_states(&spec, 100, &mut rng(61));
    assert_eq!(probes.len() * oracle.n_actions(), 200, "100 states x 2 actions");
    assert_eq!(q_l1_error(&oracle, 0, &oracle, &probes), 0.0);
}

#[test]
fn q_l1_error_of_zero_network_is_mean_absolute_oracle_value() {
    let spec = chain_spec(0.9);
    let oracle = build_q_oracle(&spec, &[2]).unwrap();
    let probes = vec![vec![0.0], vec![1.0]];
    let zero_q = FnQ(|_: &[f64]| vec![0.0, 0.0]);
    let got = q_l1_error(&zero_q, 0, &oracle, &probes);
    let expected = probes
        .iter()
        .map(|s| (0..2).map(|a| oracle.q_value(s, a).abs()).sum::<f64>())
        .sum::<f64>()
        / 4.0;
    assert!((got - expected).abs() < 1e-12);
}

#[test]
fn oracle_policy_beats_1000_random_policies() {
    let spec = car_on_hill();
    let oracle = build_q_oracle(&spec, &[200, 200]).unwrap();
    let mut r = rng(62);
    let oracle_return =
        evaluate_greedy(&GreedyQPolicy(&oracle), &spec, 0, spec.horizon, &mut r)[0];
    assert!(oracle_return > 0.0, "oracle policy must escape, got {oracle_return}");
    for _ in 0..1000 {
        let mut ep = crate::envs::Episode::start(spec.clone(), 0, &mut r);
        let mut rewards = Vec::new();
        while !ep.finished {
            let a = Action::Discrete(r.gen_range(0..2));
            rewards.push(ep.step(a, &mut r).unwrap().reward);
        }
        let random_return = discounted_return(&rewards, spec.gamma);
        assert!(oracle_return >= random_return);
    }
}

#[test]
fn oracle_start_value_matches_achieved_return() {
    // On a deterministic task the greedy rollout should realize the
    // oracle's own value estimate up to interpolation error.
    let spec = car_on_hill();
    let oracle = build_q_oracle(&spec, &[200, 200]).unwrap();
    let mut r = rng(63);
    let achieved = evaluate_greedy(&GreedyQPolicy(&oracle), &spec, 0, spec.horizon, &mut r)[0];
    let predicted = oracle.value(&[-0.5, 0.0]);
    assert!(
        (achieved - predicted).abs() < 0.02,
        "achieved {achieved} vs predicted {predicted}"
    );
}

#[test]
fn reward_free_behavior_gives_zero_returns() {
    // Staying in chain state A yields zero reward forever.
    let spec = chain_spec(0.9);
    let mut r = rng(64);
    let returns = evaluate_greedy(&ConstPolicy(Action::Discrete(0)), &spec, 0, 150, &mut r);
    assert_eq!(returns.len(), 3, "50-step horizon episodes in a 150-step budget");
    assert!(returns.iter().all(|v| *v == 0.0));
}

#[test]
fn single_step_absorbing_returns_the_reward() {
    // Just below the crest with escape velocity: one step, reward +1.
    let spec = car_on_hill();
    let mut r = rng(65);
    let returns = evaluate_greedy(
        &ConstPolicy(Action::Discrete(1)),
        &EnvSpec { id: "coh_edge".into(), ..spec },
        0,
        1_000,
        &mut r,
    );
    let _ = returns;
    // Constructed directly: episodes from a near-goal state.
    let mut ep = crate::envs::Episode::start(car_on_hill(), 0, &mut r);
    ep.state = vec![0.99, 2.5];
    let tr = ep.step(Action::Discrete(1), &mut r).unwrap();
    assert!(tr.absorbing && tr.reward == 1.0);
    assert_eq!(discounted_return(&[tr.reward], 0.95), 1.0);
}

#[test]
fn partial_only_episode_is_kept() {
    // Budget far below the horizon: no episode can complete, so the
    // partial's return is reported instead of nothing.
    let spec = chain_spec(0.9);
    let mut r = rng(66);
    let returns = evaluate_greedy(&ConstPolicy(Action::Discrete(1)), &spec, 0, 10, &mut r);
    assert_eq!(returns.len(), 1);
}

#[test]
fn discounted_return_geometric_series() {
    // 500 unit rewards at γ = 0.99: Σ γ^k = (1 − γ^500)/(1 − γ).
    let rewards = vec![1.0; 500];
    let got = discounted_return(&rewards, 0.99);
    let expected = (1.0 - 0.99f64.powi(500)) / 0.01;
    assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
}

fn curve(seed: u64, hash: &str, values: &[f64]) -> LearningCurve {
    LearningCurve {
        algorithm: "test".into(),
        suite: "suite".into(),
        task: "task".into(),
        seed,
        config_hash: hash.into(),
        points: values
            .iter()
            .enumerate()
            .map(|(i, v)| CurvePoint { epoch: i + 1, mean_return: *v, q_error: None })
            .collect(),
    }
}

#[test]
fn aggregate_single_run_is_degenerate_zero_width() {
    let c = curve(0, "h", &[1.0, 2.0]);
    let agg = aggregate_curves(&[&c]).unwrap();
    assert!(agg.degenerate);
    assert_eq!(agg.mean_return, vec![1.0, 2.0]);
    assert_eq!(agg.ci_return, vec![0.0, 0.0]);
}

#[test]
fn aggregate_identical_runs_zero_width() {
    let cs: Vec<LearningCurve> = (0..4).map(|s| curve(s, "h", &[0.5, 0.7, 0.9])).collect();
    let refs: Vec<&LearningCurve> = cs.iter().collect();
    let agg = aggregate_curves(&refs).unwrap();
    assert!(!agg.degenerate);
    assert!(agg.ci_return.iter().all(|w| *w == 0.0));
}

#[test]
fn aggregate_hundred_unit_variance_runs() {
    // CI half-width ≈ 1.96/√100 = 0.196 for unit-variance noise.
    let mut r = rng(67);
    let normal = rand_distr::StandardNormal;
    let cs: Vec<LearningCurve> = (0..100)
        .map(|s| {
            let v: f64 = rand::Rng::sample(&mut r, normal);
            curve(s, "h", &[v])
        })
        .collect();
    let refs: Vec<&LearningCurve> = cs.iter().collect();
    let agg = aggregate_curves(&refs).unwrap();
    assert!((agg.ci_return[0] - 0.196).abs() < 0.03, "got {}", agg.ci_return[0]);
}

#[test]
fn aggregate_rejects_mixed_configs() {
    let a = curve(0, "h1", &[1.0]);
    let b = curve(1, "h2", &[1.0]);
    assert!(matches!(aggregate_curves(&[&a, &b]), Err(EvalError::MixedConfigs(..))));
}

#[test]
fn greedy_ties_break_to_lowest_index() {
    let q = FnQ(|_: &[f64]| vec![0.5, 0.5, 0.4]);
    assert_eq!(greedy_action(&q, 0, &[0.0]), 0);
}
