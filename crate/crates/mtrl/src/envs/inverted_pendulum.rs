//! Inverted pendulum on a cart (Lagoudakis & Parr 2003): keep the pole
//! within ±π/2 using three noisy force levels. Reward is 0 while upright,
//! −1 on failure. The uniform actuator noise in ±10 N is part of the task.

use super::integrate::rk4;
use super::StepOutcome;

const M_POLE: f64 = 2.0;
const M_CART: f64 = 8.0;
const LENGTH: f64 = 0.5;
const G: f64 = 9.8;
const DT: f64 = 0.1;
const SUBSTEPS: usize = 10;

pub(crate) fn reset() -> Vec<f64> {
    vec![0.0, 0.0]
}

pub(crate) fn step(state: &[f64], force: f64) -> StepOutcome {
    let alpha = 1.0 / (M_POLE + M_CART);
    let deriv = |y: &[f64; 2]| {
        let [theta, omega] = *y;
        let accel = (G * theta.sin()
            - alpha * M_POLE * LENGTH * omega * omega * (2.0 * theta).sin() / 2.0
            - alpha * theta.cos() * force)
            / (4.0 / 3.0 * LENGTH - alpha * M_POLE * LENGTH * theta.cos().powi(2));
        [omega, accel]
    };
    let next = rk4(deriv, [state[0], state[1]], DT, SUBSTEPS);
    let failed = next[0].abs() > std::f64::consts::PI / 2.0;
    StepOutcome {
        next: next.to_vec(),
        reward: if failed { -1.0 } else { 0.0 },
        absorbing: failed,
    }
}
