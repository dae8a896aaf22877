//! Task implementations: the parameterized Car-On-Hill family, Cart-Pole,
//! Acrobot, Mountain-Car, Inverted-Pendulum, a continuous torque-pendulum
//! family, and a two-state chain MDP used by the exact oracles.
//!
//! Dynamics and constants follow each task's original description
//! (Ernst 2005 for Car-On-Hill, the OpenAI-Gym classic-control definitions,
//! Lagoudakis & Parr 2003 for the inverted pendulum). `EnvSpec::step` is a
//! pure function of `(spec, state, action, rng)`; horizon bookkeeping lives
//! in [`Episode`].

mod acrobot;
mod car_on_hill;
mod cart_pole;
mod chain;
mod integrate;
mod inverted_pendulum;
mod mountain_car;
mod torque_pendulum;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use chain::optimal_q as chain_optimal_q;
pub use torque_pendulum::pendulum_energy;

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("action {0:?} outside the action space")]
    ActionOutOfSpace(String),
    #[error("unknown task suite `{0}`")]
    UnknownSuite(String),
}

/// An action: an index into a discrete set, or a continuous vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

/// The action space of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionSpace {
    /// Physical values behind each discrete action index.
    Discrete(Vec<f64>),
    /// A box `[-bound, bound]^dim`.
    Box { bound: f64, dim: usize },
}

impl ActionSpace {
    pub fn n_discrete(&self) -> usize {
        match self {
            ActionSpace::Discrete(v) => v.len(),
            ActionSpace::Box { .. } => 0,
        }
    }
}

/// Dynamics family plus task parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnvKind {
    CarOnHill { mass: f64, action_mag: f64 },
    CartPole,
    Acrobot,
    MountainCar,
    InvertedPendulum,
    TorquePendulum { mass: f64 },
    TwoStateChain,
}

/// A fully parameterized task: dynamics, discount, and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub id: String,
    pub kind: EnvKind,
    pub gamma: f64,
    /// Steps before forced truncation.
    pub horizon: usize,
}

/// Result of one pure dynamics step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: Vec<f64>,
    pub reward: f64,
    /// Terminal state: Bellman backups must not bootstrap past it.
    pub absorbing: bool,
}

/// One `(s, a, r, s', absorbing, truncated)` sample, tagged with its task.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub task: usize,
    pub state: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub absorbing: bool,
    /// Horizon truncation; NOT absorbing — backups still bootstrap.
    pub truncated: bool,
}

impl EnvSpec {
    /// Internal state dimension.
    pub fn state_dim(&self) -> usize {
        match self.kind {
            EnvKind::CarOnHill { .. } => 2,
            EnvKind::CartPole => 4,
            EnvKind::Acrobot => 4,
            EnvKind::MountainCar => 2,
            EnvKind::InvertedPendulum => 2,
            EnvKind::TorquePendulum { .. } => 2,
            EnvKind::TwoStateChain => 1,
        }
    }

    /// Network observation dimension (differs from the state where the
    /// conventional encoding uses angles' sine/cosine).
    pub fn obs_dim(&self) -> usize {
        match self.kind {
            EnvKind::Acrobot => 6,
            EnvKind::TorquePendulum { .. } => 3,
            _ => self.state_dim(),
        }
    }

    pub fn actions(&self) -> ActionSpace {
        match self.kind {
            EnvKind::CarOnHill { action_mag, .. } => {
                ActionSpace::Discrete(vec![-action_mag, action_mag])
            }
            EnvKind::CartPole => ActionSpace::Discrete(vec![-10.0, 10.0]),
            EnvKind::Acrobot => ActionSpace::Discrete(vec![-1.0, 0.0, 1.0]),
            EnvKind::MountainCar => ActionSpace::Discrete(vec![-1.0, 0.0, 1.0]),
            EnvKind::InvertedPendulum => ActionSpace::Discrete(vec![-50.0, 0.0, 50.0]),
            EnvKind::TorquePendulum { .. } => {
                ActionSpace::Box { bound: torque_pendulum::MAX_TORQUE, dim: 1 }
            }
            EnvKind::TwoStateChain => ActionSpace::Discrete(vec![0.0, 1.0]),
        }
    }

    /// Axis-aligned bounds containing every reachable state; used by the
    /// grid oracle and for probe sampling.
    pub fn state_box(&self) -> (Vec<f64>, Vec<f64>) {
        use std::f64::consts::PI;
        match self.kind {
            EnvKind::CarOnHill { .. } => (vec![-1.0, -3.0], vec![1.0, 3.0]),
            EnvKind::CartPole => {
                (vec![-2.4, -3.0, -cart_pole::THETA_THRESHOLD, -3.5],
                 vec![2.4, 3.0, cart_pole::THETA_THRESHOLD, 3.5])
            }
            EnvKind::Acrobot => {
                (vec![-PI, -PI, -4.0 * PI, -9.0 * PI], vec![PI, PI, 4.0 * PI, 9.0 * PI])
            }
            EnvKind::MountainCar => (vec![-1.2, -0.07], vec![0.6, 0.07]),
            EnvKind::InvertedPendulum => (vec![-PI / 2.0, -8.0], vec![PI / 2.0, 8.0]),
            EnvKind::TorquePendulum { .. } => (vec![-PI, -8.0], vec![PI, 8.0]),
            EnvKind::TwoStateChain => (vec![0.0], vec![1.0]),
        }
    }

    /// Maps an internal state to the network observation.
    pub fn observe(&self, state: &[f64]) -> Vec<f64> {
        match self.kind {
            EnvKind::Acrobot => vec![
                state[0].cos(),
                state[0].sin(),
                state[1].cos(),
                state[1].sin(),
                state[2],
                state[3],
            ],
            EnvKind::TorquePendulum { .. } => vec![state[0].cos(), state[0].sin(), state[1]],
            _ => state.to_vec(),
        }
    }

    /// Initial-state distribution of the cited source. Deterministic given
    /// the RNG state.
    pub fn reset<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            EnvKind::CarOnHill { .. } => car_on_hill::reset(),
            EnvKind::CartPole => cart_pole::reset(rng),
            EnvKind::Acrobot => acrobot::reset(rng),
            EnvKind::MountainCar => mountain_car::reset(rng),
            EnvKind::InvertedPendulum => inverted_pendulum::reset(),
            EnvKind::TorquePendulum { .. } => torque_pendulum::reset(rng),
            EnvKind::TwoStateChain => chain::reset(),
        }
    }

    /// Integrates one control step. Pure in `(self, state, action)` apart
    /// from the Inverted-Pendulum's actuator noise, which draws from `rng`.
    pub fn step<R: Rng>(
        &self,
        state: &[f64],
        action: &Action,
        rng: &mut R,
    ) -> Result<StepOutcome, EnvError> {
        let discrete = |a: &Action, n: usize| -> Result<usize, EnvError> {
            match a {
                Action::Discrete(i) if *i < n => Ok(*i),
                other => Err(EnvError::ActionOutOfSpace(format!("{other:?}"))),
            }
        };
        match &self.kind {
            EnvKind::CarOnHill { mass, action_mag } => {
                let i = discrete(action, 2)?;
                let u = [-action_mag, *action_mag][i];
                Ok(car_on_hill::step(state, u, *mass))
            }
            EnvKind::CartPole => {
                let i = discrete(action, 2)?;
                Ok(cart_pole::step(state, [-10.0, 10.0][i]))
            }
            EnvKind::Acrobot => {
                let i = discrete(action, 3)?;
                Ok(acrobot::step(state, [-1.0, 0.0, 1.0][i]))
            }
            EnvKind::MountainCar => {
                let i = discrete(action, 3)?;
                Ok(mountain_car::step(state, i))
            }
            EnvKind::InvertedPendulum => {
                let i = discrete(action, 3)?;
                let noise = rng.gen_range(-10.0..10.0);
                Ok(inverted_pendulum::step(state, [-50.0, 0.0, 50.0][i] + noise))
            }
            EnvKind::TorquePendulum { mass } => match action {
                Action::Continuous(u) if u.len() == 1 => {
                    Ok(torque_pendulum::step(state, u[0], *mass))
                }
                other => Err(EnvError::ActionOutOfSpace(format!("{other:?}"))),
            },
            EnvKind::TwoStateChain => {
                let i = discrete(action, 2)?;
                Ok(chain::step(state, i))
            }
        }
    }
}

/// Episode cursor: owns the current state and the step count, enforces the
/// horizon, and assembles [`Transition`]s.
#[derive(Debug, Clone)]
pub struct Episode {
    pub spec: EnvSpec,
    pub task: usize,
    pub state: Vec<f64>,
    pub steps: usize,
    pub finished: bool,
}

impl Episode {
    pub fn start<R: Rng>(spec: EnvSpec, task: usize, rng: &mut R) -> Self {
        let state = spec.reset(rng);
        Episode { spec, task, state, steps: 0, finished: false }
    }

    /// Steps the episode; marks `finished` on absorption or horizon.
    pub fn step<R: Rng>(&mut self, action: Action, rng: &mut R) -> Result<Transition, EnvError> {
        debug_assert!(!self.finished, "stepping a finished episode");
        let outcome = self.spec.step(&self.state, &action, rng)?;
        self.steps += 1;
        let truncated = !outcome.absorbing && self.steps >= self.spec.horizon;
        let transition = Transition {
            task: self.task,
            state: std::mem::replace(&mut self.state, outcome.next.clone()),
            action,
            reward: outcome.reward,
            next_state: outcome.next,
            absorbing: outcome.absorbing,
            truncated,
        };
        self.finished = outcome.absorbing || truncated;
        Ok(transition)
    }

    pub fn restart<R: Rng>(&mut self, rng: &mut R) {
        self.state = self.spec.reset(rng);
        self.steps = 0;
        self.finished = false;
    }
}

/// Named task suites in paper order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    CarOnHill8,
    Mdqn5,
    PendulumFamily3,
}

impl std::str::FromStr for SuiteName {
    type Err = EnvError;
    fn from_str(s: &str) -> Result<Self, EnvError> {
        match s {
            "car_on_hill_8" => Ok(SuiteName::CarOnHill8),
            "mdqn_5" => Ok(SuiteName::Mdqn5),
            "pendulum_family_3" => Ok(SuiteName::PendulumFamily3),
            other => Err(EnvError::UnknownSuite(other.into())),
        }
    }
}

impl std::fmt::Display for SuiteName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SuiteName::CarOnHill8 => "car_on_hill_8",
            SuiteName::Mdqn5 => "mdqn_5",
            SuiteName::PendulumFamily3 => "pendulum_family_3",
        };
        f.write_str(s)
    }
}

/// Builds the fully parameterized specs of a named suite.
pub fn make_task_suite(name: SuiteName) -> Vec<EnvSpec> {
    match name {
        SuiteName::CarOnHill8 => {
            // (mass, action magnitude) per task, in table order.
            let params = [
                (1.0, 4.0),
                (0.8, 4.0),
                (1.0, 4.5),
                (1.2, 4.5),
                (1.0, 4.125),
                (1.0, 4.25),
                (0.8, 4.375),
                (0.85, 4.0),
            ];
            params
                .iter()
                .enumerate()
                .map(|(i, &(mass, action_mag))| EnvSpec {
                    id: format!("car_on_hill_{}", i + 1),
                    kind: EnvKind::CarOnHill { mass, action_mag },
                    gamma: 0.95,
                    horizon: 100,
                })
                .collect()
        }
        SuiteName::Mdqn5 => vec![
            EnvSpec { id: "cart_pole".into(), kind: EnvKind::CartPole, gamma: 0.99, horizon: 500 },
            EnvSpec { id: "acrobot".into(), kind: EnvKind::Acrobot, gamma: 0.99, horizon: 1000 },
            EnvSpec {
                id: "mountain_car".into(),
                kind: EnvKind::MountainCar,
                gamma: 0.99,
                horizon: 1000,
            },
            EnvSpec {
                id: "car_on_hill".into(),
                kind: EnvKind::CarOnHill { mass: 1.0, action_mag: 4.0 },
                gamma: 0.95,
                horizon: 100,
            },
            EnvSpec {
                id: "inverted_pendulum".into(),
                kind: EnvKind::InvertedPendulum,
                gamma: 0.95,
                horizon: 3000,
            },
        ],
        SuiteName::PendulumFamily3 => [0.8, 1.0, 1.2]
            .iter()
            .enumerate()
            .map(|(i, &mass)| EnvSpec {
                id: format!("pendulum_{}", i + 1),
                kind: EnvKind::TorquePendulum { mass },
                gamma: 0.99,
                horizon: 200,
            })
            .collect(),
    }
}
