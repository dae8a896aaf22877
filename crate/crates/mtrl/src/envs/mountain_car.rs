//! Mountain-Car, Gym discrete definition: the classic underpowered car on
//! a sinusoidal valley, −1 per step until the right crest is reached.

use rand::Rng;

use super::StepOutcome;

const MIN_POS: f64 = -1.2;
const MAX_POS: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POS: f64 = 0.5;
const FORCE: f64 = 0.001;
const GRAVITY: f64 = 0.0025;

pub(crate) fn reset<R: Rng>(rng: &mut R) -> Vec<f64> {
    vec![rng.gen_range(-0.6..-0.4), 0.0]
}

pub(crate) fn step(state: &[f64], action: usize) -> StepOutcome {
    let (p, v) = (state[0], state[1]);
    let mut v = v + (action as f64 - 1.0) * FORCE - GRAVITY * (3.0 * p).cos();
    v = v.clamp(-MAX_SPEED, MAX_SPEED);
    let mut p = (p + v).clamp(MIN_POS, MAX_POS);
    if p == MIN_POS && v < 0.0 {
        v = 0.0;
    }
    let done = p >= GOAL_POS;
    if done {
        p = p.min(MAX_POS);
    }
    StepOutcome { next: vec![p, v], reward: -1.0, absorbing: done }
}
