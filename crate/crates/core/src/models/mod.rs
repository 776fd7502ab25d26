//! Forecasting models behind the [`Predictor`] contract.
//!
//! Trainable networks ([`lstm`], [`mlp`]) are fitted by mini-batch Adam on
//! mean squared error with hand-derived gradients. [`arima`] refits on every
//! window it is asked to forecast. [`gpr`] and [`krr`] share the RBF kernel
//! machinery in [`kernel`].

pub mod arima;
pub mod checkpoint;
pub mod gpr;
pub mod kernel;
pub mod krr;
pub mod lstm;
pub mod mlp;
mod train;

use alloc::vec::Vec;

use crate::error::Result;
use crate::numerics::Matrix;

pub use train::{SupervisedSet, TrainConfig, TrainHistory};

/// A fitted model mapping one M × K window to an output vector.
///
/// `predict` must be a pure function of the fitted parameters and the window.
pub trait Predictor {
    /// 1 for single-vital predictors, the number of vitals for a generator.
    fn output_dim(&self) -> usize;

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        (**self).predict(window)
    }
}

impl<P: Predictor + ?Sized> Predictor for alloc::boxed::Box<P> {
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        (**self).predict(window)
    }
}

/// Initial weights are uniform in `[-INIT_RANGE, INIT_RANGE]`.
pub const INIT_RANGE: f64 = 0.08;
