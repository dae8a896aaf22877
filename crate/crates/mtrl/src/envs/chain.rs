//! A deterministic two-state chain MDP with a closed-form optimal
//! Q-function; the exactness anchor for the value-iteration oracle and the
//! Bellman-target tests.
//!
//! States A=0 and B=1, actions `stay`/`switch`:
//! A,stay → A r=0; A,switch → B r=0; B,stay → B r=1; B,switch → A r=0.
//! With discount γ: Q*(A,stay)=γ²/(1−γ), Q*(A,switch)=γ/(1−γ),
//! Q*(B,stay)=1/(1−γ), Q*(B,switch)=γ²/(1−γ).

use super::StepOutcome;

pub(crate) fn reset() -> Vec<f64> {
    vec![0.0]
}

pub(crate) fn step(state: &[f64], action: usize) -> StepOutcome {
    let at_b = state[0] > 0.5;
    let stay = action == 0;
    let (next, reward) = match (at_b, stay) {
        (false, true) => (0.0, 0.0),
        (false, false) => (1.0, 0.0),
        (true, true) => (1.0, 1.0),
        (true, false) => (0.0, 0.0),
    };
    StepOutcome { next: vec![next], reward, absorbing: false }
}

/// The closed-form optimal action values `[Q*(s,stay), Q*(s,switch)]`.
pub fn optimal_q(state: f64, gamma: f64) -> [f64; 2] {
    let vb = 1.0 / (1.0 - gamma);
    let va = gamma * vb;
    if state > 0.5 {
        [1.0 + gamma * vb, gamma * va]
    } else {
        [gamma * va, gamma * vb]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_satisfies_bellman() {
        let gamma = 0.95;
        for s in [0.0, 1.0] {
            for a in 0..2 {
                let out = step(&[s], a);
                let next_best =
                    optimal_q(out.next[0], gamma).into_iter().fold(f64::NEG_INFINITY, f64::max);
                let q = optimal_q(s, gamma)[a];
                assert!((q - (out.reward + gamma * next_best)).abs() < 1e-12);
            }
        }
    }
}
