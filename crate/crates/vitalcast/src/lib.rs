//! File formats, the threaded experiment driver and the command-line
//! interface of vitalcast. The numerical work lives in `vitalcast_core`.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod files;
pub mod report;
pub mod runner;

pub use error::{AppError, AppResult};
