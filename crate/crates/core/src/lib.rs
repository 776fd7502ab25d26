//! Allocation-only core of vitalcast: long-range vital-sign forecasting with
//! generative boosting.
//!
//! A generative model synthesizes the next few time steps of a patient's
//! observation window, then horizon-specific predictive models forecast from
//! the augmented window. The crate also carries the benchmark forecasters
//! (LSTM, MLP, ARIMA(2,0,1), Gaussian process and kernel ridge regression),
//! nearest-neighbour mutual information for representative training-subset
//! selection, a synthetic cohort generator and the metric/report model.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! the threaded experiment driver live in the `vitalcast` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod evaluation;
pub mod math;
pub mod micluster;
pub mod models;
pub mod numerics;
pub mod strategies;
pub mod synthgen;

pub use error::{Error, Result};
