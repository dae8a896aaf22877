//! Minimal dense-network engine: layers, activations, manual backprop, Adam.
//!
//! Everything is `f64`, row-major, and allocation-conscious: the training
//! loops in [`crate::algos`] push millions of samples through these routines.
//! Reverse-mode gradients are exact; the test suite checks them against
//! central finite differences for every activation used in the crate.

mod adam;
mod loss;

pub use adam::{adam_step, AdamState};
pub use loss::{loss_eval, LossKind, LossSpec};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Errors raised by the network engine.
#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("input has dimension {got}, layer expects {expected}")]
    InputShape { expected: usize, got: usize },
    #[error("gradient shape does not match parameters in {block}")]
    GradShape { block: String },
    #[error("non-finite gradient in {block}")]
    NonFiniteGrad { block: String },
    #[error("layer dimensions do not chain: layer {index} outputs {out}, next expects {next_in}")]
    DimChain { index: usize, out: usize, next_in: usize },
}

/// Pointwise activation applied after each affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed in terms of the activation *output* `y`.
    ///
    /// All four activations admit this form, which lets backprop work from
    /// the cached post-activation values alone.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(Activation::Linear),
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// One dense layer: `y = act(W x + b)` with `W` stored row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl Layer {
    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng>(input_dim: usize, output_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = (6.0 / (input_dim + output_dim) as f64).sqrt();
        let weights = (0..input_dim * output_dim)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        Layer {
            weights,
            bias: vec![0.0; output_dim],
            input_dim,
            output_dim,
            activation,
        }
    }

    pub fn zeros(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        Layer {
            weights: vec![0.0; input_dim * output_dim],
            bias: vec![0.0; output_dim],
            input_dim,
            output_dim,
            activation,
        }
    }

    #[inline]
    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.chunks_exact(self.input_dim).zip(&self.bias) {
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b;
            out.push(self.activation.apply(z));
        }
    }
}

/// A feed-forward stack of [`Layer`]s. Zero layers is the identity map,
/// which is how pass-through input blocks are represented.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
    input_dim: usize,
}

/// Per-layer post-activation values kept for backprop. Reusable across
/// samples to avoid per-sample allocation.
#[derive(Debug, Default, Clone)]
pub struct Cache {
    outputs: Vec<Vec<f64>>,
}

/// Gradient buffers mirroring a network's parameter shapes. Accumulating:
/// callers zero it once per batch and sum per-sample contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        NetGrads {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn zero(&mut self) {
        for g in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Scales every component, e.g. by `1/(nT)` for a batch mean.
    pub fn scale(&mut self, factor: f64) {
        for g in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            g.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Adds `other` into `self` (shapes must match).
    pub fn add_assign(&mut self, other: &NetGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

impl DenseNet {
    /// Builds a net from `(width, activation)` layer specs with Glorot init.
    pub fn new<R: Rng>(input_dim: usize, specs: &[(usize, Activation)], rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(specs.len());
        let mut dim = input_dim;
        for &(width, act) in specs {
            layers.push(Layer::glorot(dim, width, act, rng));
            dim = width;
        }
        DenseNet { layers, input_dim }
    }

    /// The identity map on `dim` components (an empty layer stack).
    pub fn identity(dim: usize) -> Self {
        DenseNet { layers: Vec::new(), input_dim: dim }
    }

    pub fn from_layers(layers: Vec<Layer>, input_dim: usize) -> Result<Self, NnError> {
        let mut dim = input_dim;
        for (i, l) in layers.iter().enumerate() {
            if l.input_dim != dim {
                return Err(NnError::DimChain { index: i, out: dim, next_in: l.input_dim });
            }
            dim = l.output_dim;
        }
        Ok(DenseNet { layers, input_dim })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, |l| l.output_dim)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Plain forward pass; allocates the output vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        if x.len() != self.input_dim {
            return Err(NnError::InputShape { expected: self.input_dim, got: x.len() });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass that records per-layer activations into `cache` for a
    /// later [`DenseNet::backward`]. Returns a view of the final output.
    pub fn forward_cached<'c>(&self, x: &[f64], cache: &'c mut Cache) -> Result<&'c [f64], NnError> {
        if x.len() != self.input_dim {
            return Err(NnError::InputShape { expected: self.input_dim, got: x.len() });
        }
        cache.outputs.resize_with(self.layers.len().max(1), Vec::new);
        if self.layers.is_empty() {
            cache.outputs[0].clear();
            cache.outputs[0].extend_from_slice(x);
            return Ok(&cache.outputs[0]);
        }
        for i in 0..self.layers.len() {
            // Split-borrow: slot i is written while slot i-1 is read.
            let (done, rest) = cache.outputs.split_at_mut(i);
            let input: &[f64] = if i == 0 { x } else { &done[i - 1] };
            self.layers[i].forward_into(input, &mut rest[0]);
        }
        Ok(&cache.outputs[self.layers.len() - 1])
    }

    /// Exact reverse-mode gradients for the scalar loss whose output
    /// gradient is `dl_dy`. Accumulates into `grads` (`+=`) and returns
    /// `dL/dx`. `cache` must hold the activations of a forward pass on `x`.
    pub fn backward(
        &self,
        x: &[f64],
        cache: &Cache,
        dl_dy: &[f64],
        grads: &mut NetGrads,
    ) -> Result<Vec<f64>, NnError> {
        if dl_dy.len() != self.output_dim() {
            return Err(NnError::GradShape { block: "output gradient".into() });
        }
        if self.layers.is_empty() {
            return Ok(dl_dy.to_vec());
        }
        let mut delta = dl_dy.to_vec();
        let mut dz = Vec::new();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let y = &cache.outputs[l];
            let input: &[f64] = if l == 0 { x } else { &cache.outputs[l - 1] };
            dz.clear();
            dz.extend(
                delta
                    .iter()
                    .zip(y)
                    .map(|(d, out)| d * layer.activation.derivative_from_output(*out)),
            );
            let gw = &mut grads.weights[l];
            let gb = &mut grads.bias[l];
            let mut dx = vec![0.0; layer.input_dim];
            for ((row, gw_row), (dzi, gbi)) in layer
                .weights
                .chunks_exact(layer.input_dim)
                .zip(gw.chunks_exact_mut(layer.input_dim))
                .zip(dz.iter().zip(gb.iter_mut()))
            {
                *gbi += dzi;
                for ((g, xi), (w, dxi)) in
                    gw_row.iter_mut().zip(input).zip(row.iter().zip(dx.iter_mut()))
                {
                    *g += dzi * xi;
                    *dxi += dzi * w;
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// Like [`DenseNet::backward`] but skips parameter-gradient
    /// accumulation: only the input gradient is produced. Used to
    /// differentiate *through* frozen sections and through the critic when
    /// updating the actor.
    pub fn backward_input_only(&self, cache: &Cache, dl_dy: &[f64]) -> Result<Vec<f64>, NnError> {
        if dl_dy.len() != self.output_dim() {
            return Err(NnError::GradShape { block: "output gradient".into() });
        }
        if self.layers.is_empty() {
            return Ok(dl_dy.to_vec());
        }
        let mut delta = dl_dy.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let y = &cache.outputs[l];
            let mut dx = vec![0.0; layer.input_dim];
            for (row, (d, out)) in layer
                .weights
                .chunks_exact(layer.input_dim)
                .zip(delta.iter().zip(y))
            {
                let dzi = d * layer.activation.derivative_from_output(*out);
                for (w, dxi) in row.iter().zip(dx.iter_mut()) {
                    *dxi += dzi * w;
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// True when every weight and bias is finite.
    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Copies parameters from `src` (shapes must already match).
    pub fn copy_params_from(&mut self, src: &DenseNet) {
        for (dst, s) in self.layers.iter_mut().zip(&src.layers) {
            dst.weights.copy_from_slice(&s.weights);
            dst.bias.copy_from_slice(&s.bias);
        }
    }

    /// Soft-blends parameters: `self := tau * src + (1 - tau) * self`.
    pub fn blend_params_from(&mut self, src: &DenseNet, tau: f64) {
        for (dst, s) in self.layers.iter_mut().zip(&src.layers) {
            for (d, v) in dst.weights.iter_mut().zip(&s.weights) {
                *d = tau * v + (1.0 - tau) * *d;
            }
            for (d, v) in dst.bias.iter_mut().zip(&s.bias) {
                *d = tau * v + (1.0 - tau) * *d;
            }
        }
    }

    /// Architecture (dims + activations) equality, ignoring parameter values.
    pub fn same_architecture(&self, other: &DenseNet) -> bool {
        self.input_dim == other.input_dim
            && self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.input_dim == b.input_dim
                    && a.output_dim == b.output_dim
                    && a.activation == b.activation
            })
    }
}

#[cfg(test)]
mod tests;
