//! Kernel ridge regression with an RBF kernel: `α = (K + λI)⁻¹ y`,
//! `f(x) = k(x, X) α`. Used in the benchmark slot of an RBF support vector
//! regressor and labelled as a substitute wherever it is reported.

use alloc::vec::Vec;

use crate::error::Result;
use crate::models::kernel::{select_by_validation, Centering, GridPoint, KernelModel, RbfKernel, Selection};
use crate::models::SupervisedSet;

/// Human-readable label used in reports.
pub const KRR_LABEL: &str = "KRR (SVR substitute)";

/// Hyperparameters of a KRR fit; the kernel variance is fixed at 1 since it
/// only rescales λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrrHyper {
    pub length_scale: f64,
    pub lambda: f64,
}

pub fn krr_fit(data: &SupervisedSet<'_>, hyper: KrrHyper) -> Result<KernelModel> {
    KernelModel::fit(data, RbfKernel::new(1.0, hyper.length_scale)?, hyper.lambda, Centering::None)
}

pub fn krr_predict(model: &KernelModel, x: &[f64]) -> Result<f64> {
    model.predict_slice(x)
}

/// Default grid over (ℓ as a multiple of the median distance, λ).
pub fn default_grid() -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for &length_scale_factor in &[0.5, 1.0, 2.0] {
        for &noise in &[1e-3, 1e-2, 1e-1] {
            grid.push(GridPoint {
                variance: 1.0,
                length_scale_factor,
                noise,
            });
        }
    }
    grid
}

pub fn krr_select(train: &SupervisedSet<'_>, validation: &SupervisedSet<'_>, grid: &[GridPoint]) -> Result<Selection> {
    select_by_validation(train, validation, grid, Centering::None)
}
