//! Acrobot swing-up, Gym "book" dynamics: two links, torque on the second
//! joint, −1 reward per step until the tip swings above the bar.
//! Internal state is `(θ1, θ2, θ̇1, θ̇2)`; the observation encodes angles
//! as sine/cosine pairs.

use std::f64::consts::PI;

use rand::Rng;

use super::integrate::rk4;
use super::StepOutcome;

const DT: f64 = 0.2;
const M1: f64 = 1.0;
const M2: f64 = 1.0;
const L1: f64 = 1.0;
const LC1: f64 = 0.5;
const LC2: f64 = 0.5;
const I1: f64 = 1.0;
const I2: f64 = 1.0;
const G: f64 = 9.8;
const MAX_VEL_1: f64 = 4.0 * PI;
const MAX_VEL_2: f64 = 9.0 * PI;

pub(crate) fn reset<R: Rng>(rng: &mut R) -> Vec<f64> {
    (0..4).map(|_| rng.gen_range(-0.1..0.1)).collect()
}

fn wrap_pi(x: f64) -> f64 {
    let mut y = (x + PI) % (2.0 * PI);
    if y < 0.0 {
        y += 2.0 * PI;
    }
    y - PI
}

pub(crate) fn step(state: &[f64], torque: f64) -> StepOutcome {
    let deriv = |y: &[f64; 4]| {
        let [theta1, theta2, dtheta1, dtheta2] = *y;
        let d1 = M1 * LC1 * LC1
            + M2 * (L1 * L1 + LC2 * LC2 + 2.0 * L1 * LC2 * theta2.cos())
            + I1
            + I2;
        let d2 = M2 * (LC2 * LC2 + L1 * LC2 * theta2.cos()) + I2;
        let phi2 = M2 * LC2 * G * (theta1 + theta2 - PI / 2.0).cos();
        let phi1 = -M2 * L1 * LC2 * dtheta2 * dtheta2 * theta2.sin()
            - 2.0 * M2 * L1 * LC2 * dtheta2 * dtheta1 * theta2.sin()
            + (M1 * LC1 + M2 * L1) * G * (theta1 - PI / 2.0).cos()
            + phi2;
        let ddtheta2 = (torque + d2 / d1 * phi1
            - M2 * L1 * LC2 * dtheta1 * dtheta1 * theta2.sin()
            - phi2)
            / (M2 * LC2 * LC2 + I2 - d2 * d2 / d1);
        let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        [dtheta1, dtheta2, ddtheta1, ddtheta2]
    };
    let y = rk4(deriv, [state[0], state[1], state[2], state[3]], DT, 1);
    let next = vec![
        wrap_pi(y[0]),
        wrap_pi(y[1]),
        y[2].clamp(-MAX_VEL_1, MAX_VEL_1),
        y[3].clamp(-MAX_VEL_2, MAX_VEL_2),
    ];
    let done = -next[0].cos() - (next[1] + next[0]).cos() > 1.0;
    StepOutcome { next, reward: if done { 0.0 } else { -1.0 }, absorbing: done }
}
