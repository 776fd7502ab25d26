use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Moment estimates and hyperparameters for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Number of steps taken so far.
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Fresh state with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(dim: usize) -> Self {
        Self::with_hyperparams(dim, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparams(dim: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }
}

/// One bias-corrected Adam update, in place.
///
/// Gradients are validated before anything is touched, so on error both
/// `params` and `state` are unchanged.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::shape(
            "adam_step",
            params.len(),
            alloc::format!("grads {} / m {} / v {}", grads.len(), state.m.len(), state.v.len()),
        ));
    }
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::invalid(alloc::format!("learning rate must be positive, got {lr}")));
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            context: "adam_step gradient",
            index,
        });
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let t = state.t.min(i32::MAX as u64) as i32;
    let c1 = 1.0 - math::powi(b1, t);
    let c2 = 1.0 - math::powi(b2, t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (math::sqrt(v_hat) + state.eps);
    }
    Ok(())
}
