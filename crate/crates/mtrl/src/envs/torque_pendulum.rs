//! Torque-limited pendulum swing-up family for the continuous-control
//! experiments: a rigid rod pivoting at one end, mass varied per task,
//! quadratic cost on angle, velocity, and torque. No terminal states;
//! episodes end by horizon.

use std::f64::consts::PI;

use rand::Rng;

use super::integrate::rk4;
use super::StepOutcome;

pub(crate) const MAX_TORQUE: f64 = 2.0;
pub(crate) const MAX_SPEED: f64 = 8.0;
const LENGTH: f64 = 1.0;
const G: f64 = 10.0;
const DT: f64 = 0.05;
const SUBSTEPS: usize = 4;

pub(crate) fn reset<R: Rng>(rng: &mut R) -> Vec<f64> {
    vec![rng.gen_range(-PI..PI), rng.gen_range(-1.0..1.0)]
}

fn wrap_pi(x: f64) -> f64 {
    let mut y = (x + PI) % (2.0 * PI);
    if y < 0.0 {
        y += 2.0 * PI;
    }
    y - PI
}

/// Angular acceleration of the rod under torque `u`; θ = 0 is upright.
fn accel(theta: f64, u: f64, mass: f64) -> f64 {
    3.0 * G / (2.0 * LENGTH) * theta.sin() + 3.0 * u / (mass * LENGTH * LENGTH)
}

pub(crate) fn step(state: &[f64], torque: f64, mass: f64) -> StepOutcome {
    let u = torque.clamp(-MAX_TORQUE, MAX_TORQUE);
    let theta = state[0];
    let omega = state[1];
    let cost = wrap_pi(theta).powi(2) + 0.1 * omega * omega + 0.001 * u * u;
    let deriv = |y: &[f64; 2]| [y[1], accel(y[0], u, mass)];
    let out = rk4(deriv, [theta, omega], DT, SUBSTEPS);
    let next = vec![wrap_pi(out[0]), out[1].clamp(-MAX_SPEED, MAX_SPEED)];
    StepOutcome { next, reward: -cost, absorbing: false }
}

/// Total mechanical energy of the unactuated rod; conserved by the exact
/// flow, so integrator quality shows up as energy drift.
pub fn pendulum_energy(theta: f64, omega: f64, mass: f64) -> f64 {
    let inertia = mass * LENGTH * LENGTH / 3.0;
    0.5 * inertia * omega * omega + mass * G * (LENGTH / 2.0) * theta.cos()
}
