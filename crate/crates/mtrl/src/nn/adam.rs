use serde::{Deserialize, Serialize};

use super::{DenseNet, NetGrads, NnError};

/// Adam moment accumulators for one [`DenseNet`]'s parameters.
///
/// Shapes mirror the parameter blocks exactly; `t` advances by one per
/// [`adam_step`]. Frozen sections simply never step, so their moments and
/// counters stay put.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_bias: Vec<Vec<f64>>,
    v_bias: Vec<Vec<f64>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh zeroed moments with the defaults the training configs use
    /// (β₁=0.9, β₂=0.999, ε=1e-8).
    pub fn new(net: &DenseNet) -> Self {
        AdamState {
            m_weights: net.layers().iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            v_weights: net.layers().iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            m_bias: net.layers().iter().map(|l| vec![0.0; l.bias.len()]).collect(),
            v_bias: net.layers().iter().map(|l| vec![0.0; l.bias.len()]).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn matches(&self, net: &DenseNet) -> bool {
        self.m_weights.len() == net.layers().len()
            && net
                .layers()
                .iter()
                .zip(&self.m_weights)
                .all(|(l, m)| l.weights.len() == m.len())
    }
}

/// One Adam update with bias correction. `net` is updated in place;
/// `state.t` increments by exactly one. A non-finite gradient aborts the
/// step with an error naming the offending block.
pub fn adam_step(
    net: &mut DenseNet,
    grads: &NetGrads,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NnError> {
    if !state.matches(net) || grads.weights.len() != net.layers().len() {
        return Err(NnError::GradShape { block: "adam state".into() });
    }
    for (l, (gw, gb)) in grads.weights.iter().zip(&grads.bias).enumerate() {
        if gw.iter().any(|g| !g.is_finite()) {
            return Err(NnError::NonFiniteGrad { block: format!("layer {l} weights") });
        }
        if gb.iter().any(|g| !g.is_finite()) {
            return Err(NnError::NonFiniteGrad { block: format!("layer {l} bias") });
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let update = |params: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for (((p, g), m), v) in params.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };
    for (i, layer) in net.layers_mut().iter_mut().enumerate() {
        update(
            &mut layer.weights,
            &grads.weights[i],
            &mut state.m_weights[i],
            &mut state.v_weights[i],
        );
        update(&mut layer.bias, &grads.bias[i], &mut state.m_bias[i], &mut state.v_bias[i]);
    }
    Ok(())
}
