//! Dense feed-forward networks with exact backprop.
//!
//! The networks are deliberately plain: fully connected `f64` layers, linear
//! or relu activations, mean-squared-error loss summed over all 64 output
//! entries. Batch gradients are reduced deterministically (see
//! [`crate::exec`]): the per-sample accumulation order inside a chunk and
//! the fold order across chunks are fixed, so a batch gradient is bitwise
//! reproducible regardless of thread count.

mod analytic;
mod optim;
mod train;
mod weights;

pub use analytic::exact_gate_net;
pub use optim::{adadelta_step, adagrad_step, Optimizer, OptimizerKind};
pub use train::{
    evaluate_probe, train, EpochStats, ProbeStats, RecordSchedule, TrainConfig, TrainPhase,
};
pub use weights::{load_network, save_network};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::NetError;
use crate::exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative with respect to the pre-activation; the relu kink at zero
    /// is assigned derivative zero.
    #[inline]
    fn grad(self, z: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            other => Err(format!("unknown activation {other:?}")),
        }
    }
}

/// One dense layer; weights are row-major `out_dim x in_dim`.
#[derive(Clone, Debug)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    #[inline]
    fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform initialization: weights uniform in
    /// `[-sqrt(6 / (fan_in + fan_out)), +...]`, biases zero, drawn in layer
    /// order from a ChaCha stream so the same seed always yields the same
    /// parameters.
    pub fn init(dims: &[usize], activations: &[Activation], seed: u64) -> Result<Self, NetError> {
        if dims.len() < 2 {
            return Err(NetError::BadShape {
                reason: format!("need at least input and output dims, got {dims:?}"),
            });
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(NetError::BadShape {
                reason: format!("zero-width layer in {dims:?}"),
            });
        }
        if activations.len() != dims.len() - 1 {
            return Err(NetError::BadShape {
                reason: format!(
                    "{} activations for {} layers",
                    activations.len(),
                    dims.len() - 1
                ),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut layer = Layer::zeros(fan_in, fan_out, activations[l]);
            for w in layer.weights.iter_mut() {
                *w = rng.gen_range(-limit..=limit);
            }
            layers.push(layer);
        }
        Ok(Self { layers })
    }

    /// Assembles a network from explicit layers, checking dimension chaining.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::BadShape {
                reason: "no layers".into(),
            });
        }
        for w in layers.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(NetError::BadShape {
                    reason: format!(
                        "layer output {} feeds layer input {}",
                        w[0].out_dim, w[1].in_dim
                    ),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut Layer {
        &mut self.layers[l]
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.out_dim));
        d
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut ws = Workspace::new(self);
        self.forward_into(x, &mut ws);
        ws.acts.last().unwrap().clone()
    }

    pub(crate) fn forward_into(&self, x: &[f64], ws: &mut Workspace) {
        assert_eq!(x.len(), self.input_dim());
        ws.acts[0].copy_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let a_prev = &before[l];
            let a_next = &mut after[0];
            let z = &mut ws.preacts[l];
            for o in 0..layer.out_dim {
                z[o] = dot(layer.row(o), a_prev) + layer.bias[o];
                a_next[o] = layer.activation.apply(z[o]);
            }
        }
    }
}

/// Gradient of the batch loss with the same shape as the network.
#[derive(Clone, Debug)]
pub struct Gradient {
    pub layers: Vec<LayerGrad>,
}

#[derive(Clone, Debug)]
pub struct LayerGrad {
    pub dw: Vec<f64>,
    pub db: Vec<f64>,
}

impl Gradient {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    dw: vec![0.0; l.weights.len()],
                    db: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    fn add_assign(&mut self, other: &Gradient) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.dw.iter_mut().zip(&b.dw) {
                *x += y;
            }
            for (x, y) in a.db.iter_mut().zip(&b.db) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, s: f64) {
        for l in self.layers.iter_mut() {
            for x in l.dw.iter_mut() {
                *x *= s;
            }
            for x in l.db.iter_mut() {
                *x *= s;
            }
        }
    }
}

/// Flat sample storage; inputs and targets are contiguous row-major blocks.
#[derive(Clone, Debug)]
pub struct Dataset {
    dim_in: usize,
    dim_out: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(dim_in: usize, dim_out: usize) -> Self {
        Self {
            dim_in,
            dim_out,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn with_capacity(dim_in: usize, dim_out: usize, n: usize) -> Self {
        Self {
            dim_in,
            dim_out,
            inputs: Vec::with_capacity(n * dim_in),
            targets: Vec::with_capacity(n * dim_out),
        }
    }

    pub fn push(&mut self, input: &[f64], target: &[f64]) {
        assert_eq!(input.len(), self.dim_in);
        assert_eq!(target.len(), self.dim_out);
        self.inputs.extend_from_slice(input);
        self.targets.extend_from_slice(target);
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.dim_in
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim_in..(i + 1) * self.dim_in]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.dim_out..(i + 1) * self.dim_out]
    }
}

/// Mean over samples of the squared error summed over all output entries.
pub fn loss_mse<O: AsRef<[f64]>, T: AsRef<[f64]>>(outputs: &[O], targets: &[T]) -> f64 {
    assert_eq!(outputs.len(), targets.len());
    assert!(!outputs.is_empty());
    let mut total = 0.0;
    for (o, t) in outputs.iter().zip(targets) {
        let (o, t) = (o.as_ref(), t.as_ref());
        assert_eq!(o.len(), t.len());
        let mut s = 0.0;
        for (a, b) in o.iter().zip(t) {
            let d = a - b;
            s += d * d;
        }
        total += s;
    }
    total / outputs.len() as f64
}

/// Exact batch gradient of the mean-squared-error loss over the selected
/// samples, plus the batch loss itself. Deterministically chunked.
pub fn backward(net: &Network, data: &Dataset, batch: &[usize]) -> (Gradient, f64) {
    assert!(!batch.is_empty(), "empty batch");
    assert_eq!(data.dim_in(), net.input_dim());
    assert_eq!(data.dim_out(), net.output_dim());
    let partials = exec::map_chunks(batch.len(), exec::CHUNK, |range| {
        let mut ws = Workspace::new(net);
        let mut grad = Gradient::zeros_like(net);
        let mut sq_err = 0.0;
        for pos in range {
            let i = batch[pos];
            sq_err += accumulate_sample(net, data.input(i), data.target(i), &mut ws, &mut grad);
        }
        (grad, sq_err)
    });
    let mut iter = partials.into_iter();
    let (mut grad, mut sq_err) = iter.next().unwrap();
    for (g, s) in iter {
        grad.add_assign(&g);
        sq_err += s;
    }
    let inv = 1.0 / batch.len() as f64;
    grad.scale(inv);
    (grad, sq_err * inv)
}

/// Per-layer activation buffers reused across samples.
pub(crate) struct Workspace {
    acts: Vec<Vec<f64>>,
    preacts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_next: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(net: &Network) -> Self {
        let mut acts = vec![vec![0.0; net.input_dim()]];
        let mut preacts = Vec::with_capacity(net.layers.len());
        for l in &net.layers {
            acts.push(vec![0.0; l.out_dim]);
            preacts.push(vec![0.0; l.out_dim]);
        }
        let width = net.dims().into_iter().max().unwrap();
        Self {
            acts,
            preacts,
            delta: vec![0.0; width],
            delta_next: vec![0.0; width],
        }
    }

    /// Activations of the last layer after a `forward_into` call.
    pub(crate) fn output(&self) -> &[f64] {
        self.acts.last().unwrap()
    }
}

/// Runs one sample forward and accumulates its (unnormalized) gradient
/// contribution; returns the squared error of the sample.
fn accumulate_sample(
    net: &Network,
    x: &[f64],
    target: &[f64],
    ws: &mut Workspace,
    grad: &mut Gradient,
) -> f64 {
    net.forward_into(x, ws);
    let last = net.layers.len() - 1;
    let out = &ws.acts[last + 1];
    let mut sq_err = 0.0;
    {
        let act = net.layers[last].activation;
        let z = &ws.preacts[last];
        for j in 0..out.len() {
            let r = out[j] - target[j];
            sq_err += r * r;
            ws.delta[j] = 2.0 * r * act.grad(z[j]);
        }
    }
    for l in (0..net.layers.len()).rev() {
        let layer = &net.layers[l];
        let a_prev = &ws.acts[l];
        let lg = &mut grad.layers[l];
        for o in 0..layer.out_dim {
            let d = ws.delta[o];
            lg.db[o] += d;
            if d != 0.0 {
                axpy(&mut lg.dw[o * layer.in_dim..(o + 1) * layer.in_dim], d, a_prev);
            }
        }
        if l > 0 {
            let below = &net.layers[l - 1];
            let prev = &mut ws.delta_next[..layer.in_dim];
            prev.fill(0.0);
            for o in 0..layer.out_dim {
                let d = ws.delta[o];
                if d != 0.0 {
                    axpy(prev, d, layer.row(o));
                }
            }
            let z = &ws.preacts[l - 1];
            for i in 0..layer.in_dim {
                prev[i] *= below.activation.grad(z[i]);
            }
            std::mem::swap(&mut ws.delta, &mut ws.delta_next);
        }
    }
    sq_err
}

/// Dot product with four independent accumulators; the fixed association
/// order keeps results identical across optimization levels while still
/// vectorizing.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let split = a.len() - a.len() % 4;
    for (ca, cb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in split..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
