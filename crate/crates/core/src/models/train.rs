use alloc::vec;
use alloc::vec::Vec;

use crate::data::WindowedDataset;
use crate::error::{Error, Result};
use crate::numerics::{adam_step, AdamState, Rng};

/// Mini-batch Adam settings; the loss is always mean squared error.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

/// Per-epoch mean training loss, measured on each batch before its update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epoch_loss: Vec<f64>,
}

/// Borrowed inputs/targets for supervised fitting.
#[derive(Debug, Clone, Copy)]
pub struct SupervisedSet<'a> {
    pub inputs: &'a [f64],
    pub input_len: usize,
    pub targets: &'a [f64],
    pub target_dim: usize,
}

impl<'a> SupervisedSet<'a> {
    pub fn new(inputs: &'a [f64], input_len: usize, targets: &'a [f64], target_dim: usize) -> Result<Self> {
        if input_len == 0 || target_dim == 0 || inputs.len() % input_len != 0 {
            return Err(Error::shape("SupervisedSet inputs", alloc::format!("multiple of {input_len}"), inputs.len()));
        }
        if targets.len() != inputs.len() / input_len * target_dim {
            return Err(Error::shape(
                "SupervisedSet targets",
                inputs.len() / input_len * target_dim,
                targets.len(),
            ));
        }
        Ok(Self {
            inputs,
            input_len,
            targets,
            target_dim,
        })
    }

    /// Windows of `ds` paired with its horizon-`h` targets.
    pub fn from_windows(ds: &'a WindowedDataset, h: usize) -> Result<Self> {
        let targets = ds
            .targets(h)
            .ok_or_else(|| Error::invalid(alloc::format!("dataset has no horizon {h}")))?;
        Self::new(ds.windows(), ds.window_len() * ds.n_features(), targets, ds.target_dim())
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.input_len
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    #[inline]
    pub fn input(&self, i: usize) -> &'a [f64] {
        &self.inputs[i * self.input_len..(i + 1) * self.input_len]
    }

    #[inline]
    pub fn target(&self, i: usize) -> &'a [f64] {
        &self.targets[i * self.target_dim..(i + 1) * self.target_dim]
    }
}

/// A model with flat parameters and a per-sample gradient routine.
pub(crate) trait GradientModel {
    type Workspace;

    fn workspace(&self) -> Self::Workspace;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    /// Forward one sample, add `scale · ∂(‖y − target‖²)/∂θ` into `grad`
    /// and return the squared error.
    fn accumulate(&self, input: &[f64], target: &[f64], scale: f64, grad: &mut [f64], ws: &mut Self::Workspace) -> f64;
}

/// Shuffled mini-batch Adam on MSE. Aborts on the first non-finite batch loss.
pub(crate) fn fit_minibatch<M: GradientModel>(
    model: &mut M,
    data: &SupervisedSet<'_>,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<TrainHistory> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let n = data.len();
    let d = data.target_dim as f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = vec![0.0; model.params().len()];
    let mut adam = AdamState::new(grad.len());
    let mut ws = model.workspace();
    let mut history = TrainHistory::default();
    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut epoch_sse = 0.0;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 2.0 / (batch.len() as f64 * d);
            let mut sse = 0.0;
            for &i in batch {
                sse += model.accumulate(data.input(i), data.target(i), scale, &mut grad, &mut ws);
            }
            let loss = sse / (batch.len() as f64 * d);
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_idx,
                    loss,
                });
            }
            adam_step(model.params_mut(), &grad, &mut adam, config.learning_rate).map_err(|e| match e {
                Error::NonFinite { .. } => Error::Diverged {
                    epoch,
                    batch: batch_idx,
                    loss: f64::NAN,
                },
                other => other,
            })?;
            epoch_sse += sse;
        }
        history.epoch_loss.push(epoch_sse / (n as f64 * d));
    }
    Ok(history)
}
