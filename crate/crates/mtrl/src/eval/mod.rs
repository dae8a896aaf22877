//! Greedy-policy evaluation, learning-curve records, and cross-seed
//! aggregation with 95% confidence bands.

mod oracle;

pub use oracle::{
    build_q_oracle, build_q_oracle_with, cached_q_oracle, q_l1_error, sample_probe_states,
    OracleError, QOracle,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{Action, EnvSpec, Episode};
use crate::mtnet::MultiTaskNetwork;
use crate::stats;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("cannot aggregate runs with mixed configurations ({0} vs {1})")]
    MixedConfigs(String, String),
    #[error("cannot aggregate zero runs")]
    NoRuns,
    #[error("runs disagree on epochs")]
    EpochMismatch,
}

/// Anything that yields per-action values for a task's observation.
pub trait QFunction {
    fn q_values(&self, task: usize, obs: &[f64]) -> Vec<f64>;
}

impl QFunction for MultiTaskNetwork {
    fn q_values(&self, task: usize, obs: &[f64]) -> Vec<f64> {
        self.mt_forward(task, obs, None).expect("valid task/obs")
    }
}

/// Greedy argmax with deterministic lowest-index tie-breaking.
pub fn greedy_action<Q: QFunction + ?Sized>(q: &Q, task: usize, obs: &[f64]) -> usize {
    let values = q.q_values(task, obs);
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// A deterministic evaluation policy.
pub trait Policy {
    fn act(&self, task: usize, obs: &[f64]) -> Action;
}

/// Greedy over a Q-function (discrete actions).
pub struct GreedyQPolicy<'a, Q: QFunction + ?Sized>(pub &'a Q);

impl<Q: QFunction + ?Sized> Policy for GreedyQPolicy<'_, Q> {
    fn act(&self, task: usize, obs: &[f64]) -> Action {
        Action::Discrete(greedy_action(self.0, task, obs))
    }
}

/// Deterministic actor output scaled to the action box (no noise).
pub struct ActorPolicy<'a> {
    pub actor: &'a MultiTaskNetwork,
    pub bound: f64,
}

impl Policy for ActorPolicy<'_> {
    fn act(&self, task: usize, obs: &[f64]) -> Action {
        let raw = self.actor.mt_forward(task, obs, None).expect("valid task/obs");
        Action::Continuous(raw.into_iter().map(|v| v * self.bound).collect())
    }
}

/// Discounted return `Σ γ^k r_k` of one episode's reward sequence.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Runs greedy episodes until `eval_steps` environment steps are spent and
/// returns the per-episode discounted returns. The final episode is
/// discarded if the budget truncated it, unless it is the only one (long-
/// horizon tasks may not complete a single episode within the budget).
pub fn evaluate_greedy<P: Policy, R: Rng>(
    policy: &P,
    spec: &EnvSpec,
    task: usize,
    eval_steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut returns = Vec::new();
    let mut steps = 0;
    let mut partial = None;
    while steps < eval_steps {
        let mut ep = Episode::start(spec.clone(), task, rng);
        let mut rewards = Vec::new();
        while !ep.finished && steps < eval_steps {
            let obs = spec.observe(&ep.state);
            let tr = ep.step(policy.act(task, &obs), rng).expect("policy action in space");
            rewards.push(tr.reward);
            steps += 1;
        }
        if ep.finished {
            returns.push(discounted_return(&rewards, spec.gamma));
        } else {
            partial = Some(discounted_return(&rewards, spec.gamma));
        }
    }
    if returns.is_empty() {
        if let Some(p) = partial {
            returns.push(p);
        }
    }
    returns
}

/// One evaluation record per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epoch: usize,
    /// Mean discounted return of the greedy policy at this epoch.
    pub mean_return: f64,
    /// Mean |Q* − Q| over the probe tuples, where an oracle exists.
    pub q_error: Option<f64>,
}

/// Per-(algorithm, task, seed) learning curve with config provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub algorithm: String,
    pub suite: String,
    pub task: String,
    pub seed: u64,
    pub config_hash: String,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn returns(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_return).collect()
    }

    pub fn q_errors(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.q_error).collect()
    }

    pub fn final_return(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.mean_return)
    }

    pub fn final_q_error(&self) -> Option<f64> {
        self.points.last().and_then(|p| p.q_error)
    }
}

/// Mean curve with a 95% confidence band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub epochs: Vec<usize>,
    pub mean_return: Vec<f64>,
    pub ci_return: Vec<f64>,
    pub mean_q_error: Vec<f64>,
    pub ci_q_error: Vec<f64>,
    pub runs: usize,
    /// Single-run aggregation: CIs are zero-width by convention.
    pub degenerate: bool,
}

/// Aggregates runs of one (algorithm, task) arm across seeds.
/// All runs must share a config hash and epoch grid.
pub fn aggregate_curves(runs: &[&LearningCurve]) -> Result<AggregateCurve, EvalError> {
    let first = runs.first().ok_or(EvalError::NoRuns)?;
    for r in runs.iter().skip(1) {
        if r.config_hash != first.config_hash {
            return Err(EvalError::MixedConfigs(
                first.config_hash.clone(),
                r.config_hash.clone(),
            ));
        }
        if r.points.len() != first.points.len()
            || r.points.iter().zip(&first.points).any(|(a, b)| a.epoch != b.epoch)
        {
            return Err(EvalError::EpochMismatch);
        }
    }
    let epochs: Vec<usize> = first.points.iter().map(|p| p.epoch).collect();
    let mut mean_return = Vec::with_capacity(epochs.len());
    let mut ci_return = Vec::with_capacity(epochs.len());
    let mut mean_q_error = Vec::with_capacity(epochs.len());
    let mut ci_q_error = Vec::with_capacity(epochs.len());
    for i in 0..epochs.len() {
        let rets: Vec<f64> = runs.iter().map(|r| r.points[i].mean_return).collect();
        mean_return.push(stats::mean(&rets));
        ci_return.push(stats::ci95_half_width(&rets));
        let qs: Vec<f64> = runs.iter().filter_map(|r| r.points[i].q_error).collect();
        mean_q_error.push(stats::mean(&qs));
        ci_q_error.push(stats::ci95_half_width(&qs));
    }
    Ok(AggregateCurve {
        epochs,
        mean_return,
        ci_return,
        mean_q_error,
        ci_q_error,
        runs: runs.len(),
        degenerate: runs.len() == 1,
    })
}

#[cfg(test)]
mod tests;
