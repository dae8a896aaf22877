//! # mtrl — a multi-task reinforcement-learning lab
//!
//! Everything needed to study shared representations in value-based and
//! actor-critic RL on classic-control tasks, at desk scale:
//!
//! - [`nn`]: a dense-network engine with manual backprop and Adam.
//! - [`mtnet`]: the shared-representation architecture — per-task input
//!   blocks, one shared trunk, per-task heads — with freeze control,
//!   target syncing, and trunk transplantation.
//! - [`envs`]: Car-On-Hill (parameterized family), Cart-Pole, Acrobot,
//!   Mountain-Car, Inverted-Pendulum, a torque-pendulum family, and a
//!   two-state chain MDP for exact oracles.
//! - [`replay`]: per-task FIFO replay memories and the equal-share batch
//!   assembler.
//! - [`algos`]: FQI/MFQI, DQN/MDQN, DDPG/MDDPG, exploration schedules, and
//!   the transfer protocol (freeze/unfreeze).
//! - [`eval`]: greedy-policy evaluation, grid value-iteration Q* oracles,
//!   the L1 Q-error metric, and confidence-interval aggregation.
//! - [`bounds`]: calculators for the multi-task AVI/API error-propagation
//!   bounds and Monte-Carlo estimators of Gaussian complexity.
//! - [`config`]/[`runner`]: declarative experiment configs, deterministic
//!   seed fan-out, CSV/JSON outputs, and manifests.
//!
//! The `mtrl` binary drives experiments from TOML configs; see the book
//! under `book/` for a guided tour (its code snippets run as doc-tests).




pub mod envs;
pub mod eval;
pub mod mtnet;
pub mod nn;
pub mod replay;

pub mod snapshot;
pub mod stats;

mod rng;

pub use rng::derive_rng;

// The book's code examples compile and run with `cargo test --doc`,
// keeping the guide in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
