//! Car-On-Hill (Ernst et al. 2005): an underpowered car must escape a
//! valley. The task family varies the car mass and the thrust magnitude.
//!
//! Hill profile: `H(p) = p² + p` for `p < 0`, `p/√(1+5p²)` for `p ≥ 0`.
//! Success (`p > 1` with `|v| ≤ 3`) pays +1, leaving the domain pays −1,
//! every other step pays 0.

use super::integrate::rk4;
use super::StepOutcome;

const GRAVITY: f64 = 9.81;
const DT: f64 = 0.1;
const SUBSTEPS: usize = 10;
pub(crate) const MAX_POS: f64 = 1.0;
pub(crate) const MAX_VEL: f64 = 3.0;

fn hill_d1(p: f64) -> f64 {
    if p < 0.0 {
        2.0 * p + 1.0
    } else {
        (1.0 + 5.0 * p * p).powf(-1.5)
    }
}

fn hill_d2(p: f64) -> f64 {
    if p < 0.0 {
        2.0
    } else {
        -15.0 * p * (1.0 + 5.0 * p * p).powf(-2.5)
    }
}

pub(crate) fn reset() -> Vec<f64> {
    vec![-0.5, 0.0]
}

pub(crate) fn step(state: &[f64], thrust: f64, mass: f64) -> StepOutcome {
    let deriv = |y: &[f64; 2]| {
        let [p, v] = *y;
        let d1 = hill_d1(p);
        let d2 = hill_d2(p);
        let accel =
            (thrust - GRAVITY * mass * d1 - v * v * mass * d1 * d2) / (mass * (1.0 + d1 * d1));
        [v, accel]
    };
    let [p, v] = rk4(deriv, [state[0], state[1]], DT, SUBSTEPS);
    let (reward, absorbing) = if p < -MAX_POS || v.abs() > MAX_VEL {
        (-1.0, true)
    } else if p > MAX_POS && v.abs() <= MAX_VEL {
        (1.0, true)
    } else {
        (0.0, false)
    };
    StepOutcome { next: vec![p, v], reward, absorbing }
}
