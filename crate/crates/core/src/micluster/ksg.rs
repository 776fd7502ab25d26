//! Kraskov–Stögbauer–Grassberger estimator, variant 1:
//!
//! ```text
//! I(X; Y) = ψ(k) + ψ(n) − ⟨ψ(n_x + 1) + ψ(n_y + 1)⟩
//! ```
//!
//! `ε_i` is the max-norm distance from sample `i` to its k-th neighbour in
//! the joint space, and `n_x`, `n_y` count the samples strictly closer than
//! `ε_i` in each marginal space. Neighbours are found by brute force.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::digamma;
use crate::numerics::{Matrix, Rng};

/// Tie-breaking jitter amplitude added to every coordinate.
pub const JITTER_SCALE: f64 = 1e-10;

/// An MI estimate in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub nats: f64,
    /// Set when some input coordinate had zero variance and no jitter was
    /// applied, so distances in that coordinate are all tied.
    pub degenerate: bool,
}

fn has_constant_column(m: &Matrix) -> bool {
    (0..m.cols()).any(|c| {
        let first = m.get(0, c);
        (1..m.rows()).all(|r| m.get(r, c) == first)
    })
}

fn jittered(m: &Matrix, rng: &mut Rng) -> Matrix {
    let mut out = m.clone();
    for v in out.as_mut_slice() {
        *v += JITTER_SCALE * rng.uniform();
    }
    out
}

#[inline]
fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Estimate `I(X; Y)` from paired rows of `x` (n × dx) and `y` (n × dy).
///
/// With `jitter`, `u · 1e-10` (u uniform from the generator) is added to every
/// coordinate first, x before y, row-major.
pub fn ksg_mi(x: &Matrix, y: &Matrix, k: usize, jitter: Option<&mut Rng>) -> Result<MiEstimate> {
    let n = x.rows();
    if y.rows() != n {
        return Err(Error::shape("ksg_mi sample count", n, y.rows()));
    }
    if k == 0 {
        return Err(Error::invalid("ksg_mi needs k ≥ 1"));
    }
    if n <= k {
        return Err(Error::invalid(alloc::format!("ksg_mi needs more than k = {k} samples, got {n}")));
    }
    if x.cols() == 0 || y.cols() == 0 {
        return Err(Error::invalid("ksg_mi inputs need at least one column"));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::invalid("ksg_mi samples must be finite"));
    }
    let (x, y, degenerate) = match jitter {
        Some(rng) => (jittered(x, rng), jittered(y, rng), false),
        None => (x.clone(), y.clone(), has_constant_column(x) || has_constant_column(y)),
    };
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    let mut dz: Vec<f64> = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    for i in 0..n {
        let (xi, yi) = (x.row(i), y.row(i));
        dz.clear();
        for j in 0..n {
            let a = max_norm(xi, x.row(j));
            let b = max_norm(yi, y.row(j));
            dx[j] = a;
            dy[j] = b;
            if j != i {
                dz.push(a.max(b));
            }
        }
        let (_, eps, _) = dz.select_nth_unstable_by(k - 1, f64::total_cmp);
        let eps = *eps;
        let mut nx = 0usize;
        let mut ny = 0usize;
        for j in 0..n {
            if j != i {
                nx += usize::from(dx[j] < eps);
                ny += usize::from(dy[j] < eps);
            }
        }
        acc += digamma((nx + 1) as f64) + digamma((ny + 1) as f64);
    }
    Ok(MiEstimate {
        nats: digamma(k as f64) + digamma(n as f64) - acc / n as f64,
        degenerate,
    })
}
