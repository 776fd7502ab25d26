//! Gaussian process regression posterior mean with an RBF kernel.
//!
//! `μ(x) = ȳ + k(x, X) (K + λI)⁻¹ (y − ȳ)`, where `K_ij = σ² exp(−‖x_i − x_j‖²/2ℓ²)`.

use crate::error::Result;
use crate::models::kernel::{select_by_validation, Centering, GridPoint, KernelModel, RbfKernel, Selection};
use crate::models::SupervisedSet;

/// Hyperparameters of a GPR fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GprHyper {
    pub kernel: RbfKernel,
    pub noise: f64,
}

/// Fit the posterior on flattened windows; the noise is escalated ×10 up to
/// three times if the Gram matrix cannot be factorized.
pub fn gpr_fit(data: &SupervisedSet<'_>, hyper: GprHyper) -> Result<KernelModel> {
    KernelModel::fit(data, hyper.kernel, hyper.noise, Centering::Mean)
}

/// Posterior mean at one flattened input.
pub fn gpr_predict(model: &KernelModel, x: &[f64]) -> Result<f64> {
    model.predict_slice(x)
}

/// Default grid over (σ², ℓ as a multiple of the median distance, λ).
pub fn default_grid() -> alloc::vec::Vec<GridPoint> {
    let mut grid = alloc::vec::Vec::new();
    for &variance in &[0.1, 1.0] {
        for &length_scale_factor in &[0.5, 1.0, 2.0] {
            for &noise in &[1e-3, 1e-2] {
                grid.push(GridPoint {
                    variance,
                    length_scale_factor,
                    noise,
                });
            }
        }
    }
    grid
}

/// Grid search on validation MSE.
pub fn gpr_select(train: &SupervisedSet<'_>, validation: &SupervisedSet<'_>, grid: &[GridPoint]) -> Result<Selection> {
    select_by_validation(train, validation, grid, Centering::Mean)
}
