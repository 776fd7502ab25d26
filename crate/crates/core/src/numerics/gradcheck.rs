use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Gradients smaller than this are compared on an absolute scale.
const DENOM_FLOOR: f64 = 1e-7;

/// Per-coordinate comparison of analytic against central-difference
/// gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub numeric: Vec<f64>,
    pub analytic: Vec<f64>,
    /// `|analytic − numeric| / max(|analytic|, |numeric|, 1e-7)` per coordinate.
    pub relative_errors: Vec<f64>,
    /// Coordinates whose relative error exceeds the tolerance.
    pub failing: Vec<usize>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.relative_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Compare `analytic` against `(f(x+h·e_i) − f(x−h·e_i)) / 2h` for every
/// coordinate `i`.
pub fn grad_check<F>(mut loss_fn: F, params: &[f64], analytic: &[f64], h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> f64,
{
    if analytic.len() != params.len() {
        return Err(Error::shape("grad_check", params.len(), analytic.len()));
    }
    if !(h > 0.0) {
        return Err(Error::invalid(alloc::format!("finite-difference step must be positive, got {h}")));
    }
    let mut x = params.to_vec();
    let mut numeric = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = x[i];
        x[i] = orig + h;
        let plus = loss_fn(&x);
        x[i] = orig - h;
        let minus = loss_fn(&x);
        x[i] = orig;
        for (value, sign) in [(plus, "+"), (minus, "-")] {
            if !value.is_finite() {
                return Err(Error::Numerical(alloc::format!(
                    "loss is {value} at coordinate {i} {sign} h (x[{i}] = {orig} {sign} {h})"
                )));
            }
        }
        numeric.push((plus - minus) / (2.0 * h));
    }
    let relative_errors: Vec<f64> = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| {
            let denom = math::abs(*a).max(math::abs(*n)).max(DENOM_FLOOR);
            math::abs(a - n) / denom
        })
        .collect();
    let failing = relative_errors
        .iter()
        .enumerate()
        .filter(|(_, e)| !(**e <= tol))
        .map(|(i, _)| i)
        .collect();
    Ok(GradCheckReport {
        numeric,
        analytic: analytic.to_vec(),
        relative_errors,
        failing,
        tol,
    })
}
