//! Training algorithms: fitted Q-iteration (single- and multi-task), DQN
//! and its multi-task variant, DDPG and its multi-task variant, plus the
//! exploration schedules and the transfer-learning protocol.
//!
//! A multi-task algorithm step advances every task's environment exactly
//! once and applies one network update on an equal-share replay batch; the
//! single-task baselines are literally the same trainers with one task.

mod ddpg;
mod dqn;
mod fqi;
mod transfer;

pub use ddpg::{ddpg_networks, mddpg_train, MddpgConfig};
pub use dqn::{mdqn_network, mdqn_train, MdqnConfig, TrainedPolicy};
pub use fqi::{fqi_run, FqiConfig, FqiRun};
pub use transfer::{run_transfer, TransferMode};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{EnvError, EnvSpec, Transition};
use crate::eval::QFunction;
use crate::mtnet::MtNetError;
use crate::replay::ReplayError;

#[derive(Debug, thiserror::Error)]
pub enum AlgoError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Net(#[from] MtNetError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("empty dataset for task {0}")]
    EmptyDataset(usize),
}

/// Linearly decaying exploration rate: `start` at step 0, `end` from
/// `decay_steps` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl EpsilonSchedule {
    /// The published DQN schedule: 1 → 0.01 over the first 5000 steps.
    pub fn dqn_default() -> Self {
        EpsilonSchedule { start: 1.0, end: 0.01, decay_steps: 5000 }
    }

    pub fn value(&self, step: usize) -> f64 {
        if self.decay_steps == 0 {
            return self.end;
        }
        let frac = (step as f64 / self.decay_steps as f64).min(1.0);
        self.start + (self.end - self.start) * frac
    }
}

/// Ornstein-Uhlenbeck exploration noise, one state per action dimension:
/// `x ← x + θ(μ − x) + σ·N(0,1)`.
#[derive(Debug, Clone)]
pub struct OuNoise {
    x: Vec<f64>,
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
}

impl OuNoise {
    pub fn new(dim: usize, theta: f64, sigma: f64) -> Self {
        OuNoise { x: vec![0.0; dim], theta, sigma, mu: 0.0 }
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> &[f64] {
        for v in self.x.iter_mut() {
            let gauss: f64 = rng.sample(rand_distr::StandardNormal);
            *v += self.theta * (self.mu - *v) + self.sigma * gauss;
        }
        &self.x
    }
}

/// Regression targets of the optimal Bellman operator for a batch of
/// discrete-action transitions: `r` when absorbing, else
/// `r + γ_t · max_a' Q(s', a')`. Horizon truncation is not absorption and
/// still bootstraps.
pub fn bellman_targets<Q: QFunction + ?Sized>(
    q: &Q,
    batch: &[Vec<&Transition>],
    specs: &[EnvSpec],
) -> Vec<Vec<f64>> {
    batch
        .iter()
        .enumerate()
        .map(|(t, transitions)| {
            let gamma = specs[t].gamma;
            transitions
                .iter()
                .map(|tr| {
                    if tr.absorbing {
                        tr.reward
                    } else {
                        let obs = specs[t].observe(&tr.next_state);
                        let best = q
                            .q_values(t, &obs)
                            .into_iter()
                            .fold(f64::NEG_INFINITY, f64::max);
                        tr.reward + gamma * best
                    }
                })
                .collect()
        })
        .collect()
}

/// FNV-style hash over every parameter's bit pattern; used to assert
/// bitwise invariance (frozen trunks, target staleness).
pub fn param_hash(net: &crate::mtnet::MultiTaskNetwork) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |v: f64| {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x100000001b3);
    };
    let mut eat_net = |n: &crate::nn::DenseNet| {
        for l in n.layers() {
            l.weights.iter().chain(&l.bias).for_each(|v| eat(*v));
        }
    };
    for t in 0..net.task_count() {
        eat_net(net.input_block(t));
    }
    eat_net(net.shared());
    for t in 0..net.task_count() {
        eat_net(net.head(t));
    }
    h
}

#[cfg(test)]
mod tests;
