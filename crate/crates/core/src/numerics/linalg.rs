use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::numerics::Matrix;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// Only the lower triangle of `a` is read.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::shape("cholesky", "square matrix", alloc::format!("{}x{}", a.rows(), a.cols())));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        {
            let lj = l.row(j);
            for v in &lj[..j] {
                d -= v * v;
            }
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Numerical(alloc::format!("matrix not positive definite at pivot {j} ({d})")));
        }
        let djj = math::sqrt(d);
        l.set(j, j, djj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            let (li, lj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= li[k] * lj[k];
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Solve `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::shape("cholesky_solve", n, b.len()));
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let mut s = y[i];
        for k in 0..i {
            s -= row[k] * y[k];
        }
        y[i] = s / row[i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    Ok(y)
}

/// Least squares `min ‖X β − y‖² + ridge ‖β‖²` via the normal equations.
pub fn least_squares(x: &Matrix, y: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if x.rows() != y.len() {
        return Err(Error::shape("least_squares", x.rows(), y.len()));
    }
    let p = x.cols();
    let mut xtx = Matrix::zeros(p, p);
    let mut xty = alloc::vec![0.0; p];
    for r in 0..x.rows() {
        let row = x.row(r);
        for i in 0..p {
            xty[i] += row[i] * y[r];
            for j in 0..=i {
                let v = xtx.get(i, j) + row[i] * row[j];
                xtx.set(i, j, v);
            }
        }
    }
    for i in 0..p {
        let v = xtx.get(i, i) + ridge;
        xtx.set(i, i, v);
    }
    let l = cholesky(&xtx)?;
    cholesky_solve(&l, &xty)
}
