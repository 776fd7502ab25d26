//! Feed-forward network on flattened windows: sigmoid hidden layers and a
//! linear output layer.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::models::train::{fit_minibatch, GradientModel};
use crate::models::{Predictor, SupervisedSet, TrainConfig, TrainHistory, INIT_RANGE};
use crate::numerics::{Matrix, Rng};

/// Hidden layer sizes used for the benchmark MLP.
pub const DEFAULT_HIDDEN: [usize; 3] = [10, 5, 3];

/// Layer sizes `[input, hidden…, output]` and flat weights, layer by layer
/// as `W` (out × in, row-major) followed by `b` (out).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    sizes: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    /// Activations per layer; entry 0 is a copy of the input.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
}

impl MlpParams {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid("MLP needs at least input and output layers, all nonzero"));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            values: vec![0.0; param_count(sizes)],
        })
    }

    pub fn init(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        let mut p = Self::zeros(sizes)?;
        for v in p.values.iter_mut() {
            *v = rng.uniform_range(-INIT_RANGE, INIT_RANGE);
        }
        Ok(p)
    }

    pub fn from_values(sizes: &[usize], values: Vec<f64>) -> Result<Self> {
        let mut p = Self::zeros(sizes)?;
        if values.len() != p.values.len() {
            return Err(Error::shape("MlpParams::from_values", p.values.len(), values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "MlpParams", index });
        }
        p.values = values;
        Ok(p)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    /// Offset of layer `l`'s weight block.
    fn layer_offset(&self, l: usize) -> usize {
        self.sizes[..l + 1].windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }

    fn new_workspace(&self) -> Workspace {
        Workspace {
            acts: self.sizes.iter().map(|&n| vec![0.0; n]).collect(),
            deltas: self.sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    fn forward_ws(&self, x: &[f64], ws: &mut Workspace) {
        ws.acts[0].copy_from_slice(x);
        let layers = self.sizes.len() - 1;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.layer_offset(l);
            let w = &self.values[off..off + n_out * n_in];
            let b = &self.values[off + n_out * n_in..off + n_out * (n_in + 1)];
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            for r in 0..n_out {
                let z = b[r] + w[r * n_in..(r + 1) * n_in].iter().zip(input.iter()).map(|(a, b)| a * b).sum::<f64>();
                out[r] = if l + 1 == layers { z } else { sigmoid(z) };
            }
        }
    }

    fn backward_ws(&self, dy: &[f64], ws: &mut Workspace, grad: &mut [f64]) {
        let layers = self.sizes.len() - 1;
        ws.deltas[layers].copy_from_slice(dy);
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.layer_offset(l);
            let w = &self.values[off..off + n_out * n_in];
            let (lower, upper) = ws.deltas.split_at_mut(l + 1);
            let delta = &upper[0];
            let input = &ws.acts[l];
            for r in 0..n_out {
                let d = delta[r];
                grad[off + n_out * n_in + r] += d;
                for c in 0..n_in {
                    grad[off + r * n_in + c] += d * input[c];
                }
            }
            if l > 0 {
                let prev = &mut lower[l];
                for c in 0..n_in {
                    let back: f64 = (0..n_out).map(|r| w[r * n_in + c] * delta[r]).sum();
                    let a = input[c];
                    prev[c] = back * a * (1.0 - a);
                }
            }
        }
    }

    pub fn predict_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.sizes[0] {
            return Err(Error::shape("MLP input", self.sizes[0], x.len()));
        }
        let mut ws = self.new_workspace();
        self.forward_ws(x, &mut ws);
        Ok(ws.acts.pop().unwrap())
    }

    /// Gradient of `output_grad · y(x)` in the flat layout.
    pub fn gradient(&self, x: &[f64], output_grad: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.sizes[0] || output_grad.len() != *self.sizes.last().unwrap() {
            return Err(Error::shape("MLP gradient", self.sizes[0], x.len()));
        }
        let mut ws = self.new_workspace();
        let mut grad = vec![0.0; self.values.len()];
        self.forward_ws(x, &mut ws);
        self.backward_ws(output_grad, &mut ws, &mut grad);
        Ok(grad)
    }

    pub fn mse(&self, data: &SupervisedSet<'_>) -> Result<f64> {
        if data.input_len != self.sizes[0] || data.target_dim != *self.sizes.last().unwrap() {
            return Err(Error::shape("MlpParams::mse", self.sizes[0], data.input_len));
        }
        let mut ws = self.new_workspace();
        let mut sse = 0.0;
        for i in 0..data.len() {
            self.forward_ws(data.input(i), &mut ws);
            sse += ws.acts.last().unwrap().iter().zip(data.target(i)).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
        }
        Ok(sse / (data.len() * data.target_dim) as f64)
    }
}

impl GradientModel for MlpParams {
    type Workspace = Workspace;

    fn workspace(&self) -> Workspace {
        self.new_workspace()
    }

    fn params(&self) -> &[f64] {
        &self.values
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn accumulate(&self, input: &[f64], target: &[f64], scale: f64, grad: &mut [f64], ws: &mut Workspace) -> f64 {
        self.forward_ws(input, ws);
        let out = ws.acts.last().unwrap();
        let mut dy = vec![0.0; out.len()];
        let mut sse = 0.0;
        for (d, (y, t)) in out.iter().zip(target).enumerate() {
            let e = y - t;
            sse += e * e;
            dy[d] = scale * e;
        }
        self.backward_ws(&dy, ws, grad);
        sse
    }
}

impl Predictor for MlpParams {
    fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// Flattens the window row-major.
    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        self.predict_slice(window.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpFit {
    pub params: MlpParams,
    pub history: TrainHistory,
}

pub fn mlp_fit(data: &SupervisedSet<'_>, config: &MlpConfig, rng: &mut Rng) -> Result<MlpFit> {
    let mut sizes = vec![data.input_len];
    sizes.extend_from_slice(&config.hidden);
    sizes.push(data.target_dim);
    let mut params = MlpParams::init(&sizes, rng)?;
    let history = fit_minibatch(&mut params, data, &config.train, rng)?;
    Ok(MlpFit { params, history })
}

/// The learning rate with the lowest validation MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpTuned {
    pub fit: MlpFit,
    pub config: MlpConfig,
    pub validation_mse: f64,
}

/// Fit one network per learning rate (candidate `i` draws from
/// `rng.substream(i)`; an empty list keeps the base rate) and keep the best
/// on `validation`.
pub fn mlp_tune(
    train: &SupervisedSet<'_>,
    validation: &SupervisedSet<'_>,
    base: &MlpConfig,
    learning_rates: &[f64],
    rng: &Rng,
) -> Result<MlpTuned> {
    if validation.is_empty() {
        return Err(Error::invalid("tuning needs validation windows"));
    }
    let lrs = if learning_rates.is_empty() { vec![base.train.learning_rate] } else { learning_rates.to_vec() };
    let mut best: Option<MlpTuned> = None;
    for (i, learning_rate) in lrs.into_iter().enumerate() {
        let config = MlpConfig {
            hidden: base.hidden.clone(),
            train: TrainConfig { learning_rate, ..base.train.clone() },
        };
        let fit = mlp_fit(train, &config, &mut rng.substream(i as u64))?;
        let validation_mse = fit.params.mse(validation)?;
        if best.as_ref().map_or(true, |b| validation_mse < b.validation_mse) {
            best = Some(MlpTuned { fit, config, validation_mse });
        }
    }
    Ok(best.expect("at least one learning rate"))
}
