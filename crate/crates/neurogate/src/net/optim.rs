//! Adagrad and AdaDelta, the raw update rules plus a network-shaped wrapper.
//!
//! Both operate element-wise on flat slices so they can be unit-tested on
//! scalars and reused unchanged for every layer. State updates run in index
//! order; nothing here depends on thread count.

use super::{Gradient, Network};

/// `accum += g^2; p -= lr * g / (sqrt(accum) + eps)`.
pub fn adagrad_step(params: &mut [f64], grads: &[f64], accum: &mut [f64], lr: f64, eps: f64) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), accum.len());
    for i in 0..params.len() {
        let g = grads[i];
        accum[i] += g * g;
        params[i] -= lr * g / (accum[i].sqrt() + eps);
    }
}

/// Learning-rate-free AdaDelta:
/// `E[g^2] = rho E[g^2] + (1 - rho) g^2`,
/// `step = sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g`,
/// `E[dx^2] = rho E[dx^2] + (1 - rho) step^2`, `p -= step`.
pub fn adadelta_step(
    params: &mut [f64],
    grads: &[f64],
    avg_sq_grad: &mut [f64],
    avg_sq_step: &mut [f64],
    rho: f64,
    eps: f64,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), avg_sq_grad.len());
    debug_assert_eq!(params.len(), avg_sq_step.len());
    for i in 0..params.len() {
        let g = grads[i];
        avg_sq_grad[i] = rho * avg_sq_grad[i] + (1.0 - rho) * g * g;
        let step = (avg_sq_step[i] + eps).sqrt() / (avg_sq_grad[i] + eps).sqrt() * g;
        avg_sq_step[i] = rho * avg_sq_step[i] + (1.0 - rho) * step * step;
        params[i] -= step;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    Adagrad { lr: f64, eps: f64 },
    Adadelta { rho: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn default_adagrad() -> Self {
        OptimizerKind::Adagrad {
            lr: 0.01,
            eps: 1e-8,
        }
    }

    pub fn default_adadelta() -> Self {
        OptimizerKind::Adadelta {
            rho: 0.95,
            eps: 1e-6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Adagrad { .. } => "adagrad",
            OptimizerKind::Adadelta { .. } => "adadelta",
        }
    }
}

/// Per-parameter optimizer state shaped like the network.
pub struct Optimizer {
    kind: OptimizerKind,
    state_a: Gradient,
    state_b: Gradient,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, net: &Network) -> Self {
        Self {
            kind,
            state_a: Gradient::zeros_like(net),
            state_b: Gradient::zeros_like(net),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step(&mut self, net: &mut Network, grad: &Gradient) {
        for (l, lg) in grad.layers.iter().enumerate() {
            let sa = &mut self.state_a.layers[l];
            let sb = &mut self.state_b.layers[l];
            let layer = net.layer_mut(l);
            match self.kind {
                OptimizerKind::Adagrad { lr, eps } => {
                    adagrad_step(layer.weights_mut(), &lg.dw, &mut sa.dw, lr, eps);
                    adagrad_step(layer.bias_mut(), &lg.db, &mut sa.db, lr, eps);
                }
                OptimizerKind::Adadelta { rho, eps } => {
                    adadelta_step(layer.weights_mut(), &lg.dw, &mut sa.dw, &mut sb.dw, rho, eps);
                    adadelta_step(layer.bias_mut(), &lg.db, &mut sa.db, &mut sb.db, rho, eps);
                }
            }
        }
    }
}
