//! Deterministic numerical substrate: dense matrices, a seeded PRNG, the
//! Adam optimizer and a central-difference gradient checker.

mod adam;
mod gradcheck;
pub mod linalg;
mod matrix;
mod rng;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{grad_check, GradCheckReport};
pub use matrix::Matrix;
pub use rng::Rng;
