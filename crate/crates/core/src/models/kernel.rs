//! RBF kernel machinery shared by [`super::gpr`] and [`super::krr`].
//!
//! Both models solve `(K + λI) α = y − μ` by Cholesky and predict
//! `μ + k(x, ·)ᵀ α`; they differ only in whether `μ` is the training mean
//! (GPR) or zero (KRR).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::models::{Predictor, SupervisedSet};
use crate::numerics::linalg::{cholesky, cholesky_solve};
use crate::numerics::Matrix;

/// How many times the noise term is escalated ×10 after a failed factorization.
pub const CHOLESKY_RETRIES: usize = 3;

/// `k(a, b) = σ² exp(−‖a − b‖² / 2ℓ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel {
    pub variance: f64,
    pub length_scale: f64,
}

impl RbfKernel {
    pub fn new(variance: f64, length_scale: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "RBF kernel needs positive finite variance and length scale, got {variance}, {length_scale}"
            )));
        }
        Ok(Self { variance, length_scale })
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.from_sq_dist(sq_dist(a, b))
    }

    #[inline]
    fn from_sq_dist(&self, d2: f64) -> f64 {
        self.variance * math::exp(-d2 / (2.0 * self.length_scale * self.length_scale))
    }
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pairwise squared distances between the rows of `x`.
pub fn sq_dist_matrix(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = sq_dist(x.row(i), x.row(j));
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    d
}

/// Gram matrix `K_ij = k(x_i, x_j)` (no noise term).
pub fn gram(x: &Matrix, kernel: &RbfKernel) -> Matrix {
    gram_from_sq_dist(&sq_dist_matrix(x), kernel)
}

fn gram_from_sq_dist(d2: &Matrix, kernel: &RbfKernel) -> Matrix {
    let n = d2.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.from_sq_dist(d2.get(i, j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// Median of the pairwise Euclidean distances between rows; a scale
/// reference for length-scale grids. Zero when all rows coincide.
pub fn median_distance(x: &Matrix) -> f64 {
    median_from_sq_dist(&sq_dist_matrix(x))
}

fn median_from_sq_dist(d2: &Matrix) -> f64 {
    let n = d2.rows();
    let mut d: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in 0..i {
            d.push(math::sqrt(d2.get(i, j)));
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    if d.len() % 2 == 1 {
        d[mid]
    } else {
        0.5 * (d[mid - 1] + d[mid])
    }
}

/// Whether the fit subtracts the training-target mean before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    Mean,
    None,
}

/// A solved kernel regression: training inputs, dual weights and offset.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub kernel: RbfKernel,
    /// Diagonal term actually used (after any escalation).
    pub noise: f64,
    pub offset: f64,
    pub inputs: Matrix,
    pub alpha: Vec<f64>,
}

impl KernelModel {
    /// Solve for the dual weights given precomputed squared distances.
    fn solve(inputs: Matrix, d2: &Matrix, y: &[f64], kernel: RbfKernel, noise: f64, centering: Centering) -> Result<Self> {
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::invalid(alloc::format!("kernel noise must be positive, got {noise}")));
        }
        let offset = match centering {
            Centering::Mean => y.iter().sum::<f64>() / y.len() as f64,
            Centering::None => 0.0,
        };
        let rhs: Vec<f64> = y.iter().map(|v| v - offset).collect();
        let base = gram_from_sq_dist(d2, &kernel);
        let mut lambda = noise;
        let mut last_err = None;
        for _ in 0..=CHOLESKY_RETRIES {
            let mut k = base.clone();
            for i in 0..k.rows() {
                let v = k.get(i, i) + lambda;
                k.set(i, i, v);
            }
            match cholesky(&k) {
                Ok(l) => {
                    let alpha = cholesky_solve(&l, &rhs)?;
                    return Ok(Self {
                        kernel,
                        noise: lambda,
                        offset,
                        inputs,
                        alpha,
                    });
                }
                Err(e) => {
                    last_err = Some(e);
                    lambda *= 10.0;
                }
            }
        }
        Err(Error::Numerical(alloc::format!(
            "kernel Gram matrix not factorizable after {CHOLESKY_RETRIES} noise escalations (last noise {}): {}",
            lambda / 10.0,
            last_err.map(|e| alloc::format!("{e}")).unwrap_or_default()
        )))
    }

    pub fn fit(data: &SupervisedSet<'_>, kernel: RbfKernel, noise: f64, centering: Centering) -> Result<Self> {
        let (inputs, y) = prepare(data)?;
        let d2 = sq_dist_matrix(&inputs);
        Self::solve(inputs, &d2, &y, kernel, noise, centering)
    }

    pub fn input_len(&self) -> usize {
        self.inputs.cols()
    }

    pub fn predict_slice(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.inputs.cols() {
            return Err(Error::shape("kernel model input", self.inputs.cols(), x.len()));
        }
        let mut s = self.offset;
        for (i, a) in self.alpha.iter().enumerate() {
            s += a * self.kernel.eval(self.inputs.row(i), x);
        }
        Ok(s)
    }
}

impl Predictor for KernelModel {
    fn output_dim(&self) -> usize {
        1
    }

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        Ok(alloc::vec![self.predict_slice(window.as_slice())?])
    }
}

fn prepare(data: &SupervisedSet<'_>) -> Result<(Matrix, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::invalid("kernel fit needs at least one sample"));
    }
    if data.target_dim != 1 {
        return Err(Error::shape("kernel fit target_dim", 1, data.target_dim));
    }
    if let Some(index) = data.inputs.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "kernel fit inputs", index });
    }
    let inputs = Matrix::from_vec(data.len(), data.input_len, data.inputs.to_vec())?;
    Ok((inputs, data.targets.to_vec()))
}

/// One point of a hyperparameter grid. The length scale is given as a
/// multiple of the training set's median pairwise distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub variance: f64,
    pub length_scale_factor: f64,
    pub noise: f64,
}

/// Outcome of a validation grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub model: KernelModel,
    pub point: GridPoint,
    pub validation_mse: f64,
}

/// Fit every grid point on `train` and keep the lowest validation MSE
/// (first point wins ties).
pub fn select_by_validation(
    train: &SupervisedSet<'_>,
    validation: &SupervisedSet<'_>,
    grid: &[GridPoint],
    centering: Centering,
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::invalid("kernel hyperparameter grid is empty"));
    }
    if validation.is_empty() {
        return Err(Error::invalid("kernel grid search needs validation samples"));
    }
    let (inputs, y) = prepare(train)?;
    let d2 = sq_dist_matrix(&inputs);
    let median = median_from_sq_dist(&d2);
    let reference = if median > 0.0 { median } else { 1.0 };
    let mut best: Option<Selection> = None;
    for point in grid {
        let kernel = RbfKernel::new(point.variance, point.length_scale_factor * reference)?;
        let model = KernelModel::solve(inputs.clone(), &d2, &y, kernel, point.noise, centering)?;
        let mut sse = 0.0;
        for i in 0..validation.len() {
            let e = model.predict_slice(validation.input(i))? - validation.target(i)[0];
            sse += e * e;
        }
        let mse = sse / validation.len() as f64;
        if best.as_ref().map_or(true, |b| mse < b.validation_mse) {
            best = Some(Selection {
                model,
                point: *point,
                validation_mse: mse,
            });
        }
    }
    Ok(best.expect("grid is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn gram_is_symmetric_positive_definite() {
        let mut rng = Rng::new(3);
        let x = Matrix::from_vec(12, 4, rng.uniform_vec(48)).unwrap();
        let k = gram(&x, &RbfKernel::new(1.3, 0.7).unwrap());
        assert!(k.is_symmetric(0.0));
        assert!(cholesky(&k).is_ok());
        for i in 0..12 {
            assert!((k.get(i, i) - 1.3).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_rejects_bad_hyperparameters() {
        assert!(RbfKernel::new(0.0, 1.0).is_err());
        assert!(RbfKernel::new(1.0, -1.0).is_err());
        assert!(RbfKernel::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn median_distance_of_collinear_points() {
        let x = Matrix::from_vec(3, 1, alloc::vec![0.0, 1.0, 3.0]).unwrap();
        // distances 1, 3, 2
        assert_eq!(median_distance(&x), 2.0);
    }

    #[test]
    fn duplicate_inputs_escalate_noise() {
        // Two identical rows: K is singular, so a tiny noise may fail and be escalated.
        let inputs = [0.5, 0.5];
        let targets = [1.0, 1.0];
        let data = SupervisedSet::new(&inputs, 1, &targets, 1).unwrap();
        let kernel = RbfKernel::new(1.0, 1.0).unwrap();
        let m = KernelModel::fit(&data, kernel, 1e-17, Centering::None).unwrap();
        assert!(m.noise > 1e-17 && m.noise <= 1e-14, "{}", m.noise);
        // Three escalations from 1e-300 cannot rescue it.
        let err = KernelModel::fit(&data, kernel, 1e-300, Centering::None).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)), "{err}");
    }

    #[test]
    fn grid_search_prefers_better_length_scale() {
        let mut rng = Rng::new(9);
        let xs: Vec<f64> = rng.uniform_vec(60).iter().map(|v| 6.0 * v).collect();
        let ys: Vec<f64> = xs.iter().map(|x| math::sin(*x)).collect();
        let train = SupervisedSet::new(&xs[..40], 1, &ys[..40], 1).unwrap();
        let val = SupervisedSet::new(&xs[40..], 1, &ys[40..], 1).unwrap();
        let grid = [
            GridPoint { variance: 1.0, length_scale_factor: 100.0, noise: 1e-3 },
            GridPoint { variance: 1.0, length_scale_factor: 0.5, noise: 1e-3 },
        ];
        let s = select_by_validation(&train, &val, &grid, Centering::Mean).unwrap();
        assert_eq!(s.point, grid[1]);
        assert!(s.validation_mse < 1e-3, "{}", s.validation_mse);
    }
}
