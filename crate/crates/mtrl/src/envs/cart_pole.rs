//! Cart-Pole balancing, Gym classic-control definition: Euler integration
//! at 0.02 s, +1 reward per step, failure at |x| > 2.4 or |θ| > 12°.

use rand::Rng;

use super::StepOutcome;

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
const HALF_POLE: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * HALF_POLE;
const TAU: f64 = 0.02;
pub(crate) const THETA_THRESHOLD: f64 = 12.0 * std::f64::consts::PI / 180.0;
const X_THRESHOLD: f64 = 2.4;

pub(crate) fn reset<R: Rng>(rng: &mut R) -> Vec<f64> {
    (0..4).map(|_| rng.gen_range(-0.05..0.05)).collect()
}

pub(crate) fn step(state: &[f64], force: f64) -> StepOutcome {
    let [x, x_dot, theta, theta_dot] = [state[0], state[1], state[2], state[3]];
    let cos = theta.cos();
    let sin = theta.sin();
    let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
    let theta_acc = (GRAVITY * sin - cos * temp)
        / (HALF_POLE * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
    let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;
    let next = vec![
        x + TAU * x_dot,
        x_dot + TAU * x_acc,
        theta + TAU * theta_dot,
        theta_dot + TAU * theta_acc,
    ];
    let failed = next[0].abs() > X_THRESHOLD || next[2].abs() > THETA_THRESHOLD;
    StepOutcome { next, reward: 1.0, absorbing: failed }
}
