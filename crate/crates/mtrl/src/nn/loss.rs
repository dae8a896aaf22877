use serde::{Deserialize, Serialize};

/// Pointwise regression loss family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Huber,
}

/// Loss on a single (prediction, target) pair.
///
/// `scale` implements the normalization ℓ = ℓ′/ε_max that turns a bounded
/// loss into a [0,1]-valued one; `None` leaves the raw loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Huber transition point; ignored for MSE. With `delta = 1` the Huber
    /// derivative is bounded by 1.
    pub delta: f64,
    /// Optional ε_max divisor applied to both value and derivative.
    pub scale: Option<f64>,
}

impl LossSpec {
    pub fn mse() -> Self {
        LossSpec { kind: LossKind::Mse, delta: 1.0, scale: None }
    }

    pub fn huber(delta: f64) -> Self {
        LossSpec { kind: LossKind::Huber, delta, scale: None }
    }

    pub fn scaled(mut self, eps_max: f64) -> Self {
        self.scale = Some(eps_max);
        self
    }
}

/// Evaluates the loss and its derivative w.r.t. the prediction.
///
/// MSE is the plain squared error `e²`; Huber is `e²/2` for `|e| ≤ δ` and
/// `δ(|e| − δ/2)` beyond, so its derivative magnitude never exceeds `δ`.
pub fn loss_eval(spec: &LossSpec, pred: f64, target: f64) -> (f64, f64) {
    let e = pred - target;
    let (mut value, mut dvalue) = match spec.kind {
        LossKind::Mse => (e * e, 2.0 * e),
        LossKind::Huber => {
            let d = spec.delta;
            if e.abs() <= d {
                (0.5 * e * e, e)
            } else {
                (d * (e.abs() - 0.5 * d), d * e.signum())
            }
        }
    };
    if let Some(eps_max) = spec.scale {
        value /= eps_max;
        dvalue /= eps_max;
    }
    (value, dvalue)
}
