//! ARIMA(2,0,1) on a demeaned series:
//!
//! ```text
//! y_t = x_t − μ,   y_t = φ1 y_{t−1} + φ2 y_{t−2} + e_t + θ e_{t−1}
//! ```
//!
//! Fitting starts from Hannan–Rissanen estimates (a long autoregression
//! supplies innovation proxies, then one regression on lags and lagged
//! proxies) and refines them by Levenberg–Marquardt on the conditional sum
//! of squares with `e_0 = e_1 = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::models::Predictor;
use crate::numerics::linalg::least_squares;
use crate::numerics::Matrix;

/// Shortest series `arima_fit` accepts.
pub const MIN_FIT_LEN: usize = 20;
const MAX_LONG_AR: usize = 10;
const MAX_ITER: usize = 100;
/// Roots are pushed at least this far outside the unit circle.
const ROOT_MARGIN: f64 = 1.01;
const MA_BOUND: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArimaCoefficients {
    pub mean: f64,
    pub ar: [f64; 2],
    pub ma: f64,
    /// Set when the estimate was moved into the stationary/invertible region.
    pub projected: bool,
}

impl ArimaCoefficients {
    /// Recursion residuals `e_t` for `series` (first two are zero).
    pub fn residuals(&self, series: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = series.iter().map(|x| x - self.mean).collect();
        css_residuals(&y, self.ar, self.ma)
    }
}

fn css_residuals(y: &[f64], ar: [f64; 2], ma: f64) -> Vec<f64> {
    let mut e = vec![0.0; y.len()];
    for t in 2..y.len() {
        e[t] = y[t] - ar[0] * y[t - 1] - ar[1] * y[t - 2] - ma * e[t - 1];
    }
    e
}

fn css(y: &[f64], ar: [f64; 2], ma: f64) -> f64 {
    css_residuals(y, ar, ma).iter().map(|e| e * e).sum()
}

/// Smallest root modulus of `1 − φ1 z − φ2 z²` (infinite when φ = 0).
fn min_root_modulus(ar: [f64; 2]) -> f64 {
    let [p1, p2] = ar;
    if p2 == 0.0 {
        return if p1 == 0.0 { f64::INFINITY } else { 1.0 / math::abs(p1) };
    }
    // Roots of φ2 z² + φ1 z − 1 = 0
    let disc = p1 * p1 + 4.0 * p2;
    if disc >= 0.0 {
        let s = math::sqrt(disc);
        let r1 = math::abs((-p1 + s) / (2.0 * p2));
        let r2 = math::abs((-p1 - s) / (2.0 * p2));
        r1.min(r2)
    } else {
        // complex pair with |z|² = −1/φ2
        math::sqrt(-1.0 / p2)
    }
}

/// Scale `(φ1, φ2)` to `(rφ1, r²φ2)`, which divides every root by `r`, so the
/// smallest root lands at `ROOT_MARGIN`.
fn project_stationary(ar: [f64; 2]) -> ([f64; 2], bool) {
    let rho = min_root_modulus(ar);
    if rho >= ROOT_MARGIN {
        return (ar, false);
    }
    let r = rho / ROOT_MARGIN;
    ([ar[0] * r, ar[1] * r * r], true)
}

pub fn is_stationary(ar: [f64; 2]) -> bool {
    min_root_modulus(ar) > 1.0
}

/// Initial estimates by the two-stage Hannan–Rissanen regressions.
fn hannan_rissanen(y: &[f64]) -> Result<([f64; 2], f64)> {
    let n = y.len();
    let m = (n / 5).clamp(3, MAX_LONG_AR);
    let rows = n - m;
    let mut x = Matrix::zeros(rows, m);
    let mut target = Vec::with_capacity(rows);
    for (r, t) in (m..n).enumerate() {
        for j in 0..m {
            x.set(r, j, y[t - 1 - j]);
        }
        target.push(y[t]);
    }
    let long_ar = least_squares(&x, &target, 1e-8)?;
    let mut innov = vec![0.0; n];
    for t in m..n {
        innov[t] = y[t] - (0..m).map(|j| long_ar[j] * y[t - 1 - j]).sum::<f64>();
    }
    let start = m + 1;
    let rows = n - start;
    let mut x = Matrix::zeros(rows, 3);
    let mut target = Vec::with_capacity(rows);
    for (r, t) in (start..n).enumerate() {
        x.set(r, 0, y[t - 1]);
        x.set(r, 1, y[t - 2]);
        x.set(r, 2, innov[t - 1]);
        target.push(y[t]);
    }
    let beta = least_squares(&x, &target, 1e-8)?;
    Ok(([beta[0], beta[1]], beta[2].clamp(-MA_BOUND, MA_BOUND)))
}

/// Levenberg–Marquardt on the conditional sum of squares.
fn refine_css(y: &[f64], ar0: [f64; 2], ma0: f64) -> ([f64; 2], f64) {
    let n = y.len();
    let mut theta = [ar0[0], ar0[1], ma0];
    let mut cost = css(y, [theta[0], theta[1]], theta[2]);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITER {
        // residuals and their parameter sensitivities by recursion
        let (p1, p2, q) = (theta[0], theta[1], theta[2]);
        let mut e = vec![0.0; n];
        let mut de = vec![[0.0f64; 3]; n];
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jte = [0.0f64; 3];
        for t in 2..n {
            e[t] = y[t] - p1 * y[t - 1] - p2 * y[t - 2] - q * e[t - 1];
            de[t] = [
                -y[t - 1] - q * de[t - 1][0],
                -y[t - 2] - q * de[t - 1][1],
                -e[t - 1] - q * de[t - 1][2],
            ];
            for a in 0..3 {
                jte[a] += de[t][a] * e[t];
                for b in 0..3 {
                    jtj[a][b] += de[t][a] * de[t][b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut a = Matrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    a.set(i, j, jtj[i][j] + if i == j { lambda * (1.0 + jtj[i][i]) } else { 0.0 });
                }
            }
            let Ok(l) = crate::numerics::linalg::cholesky(&a) else {
                lambda *= 10.0;
                continue;
            };
            let Ok(step) = crate::numerics::linalg::cholesky_solve(&l, &[-jte[0], -jte[1], -jte[2]]) else {
                lambda *= 10.0;
                continue;
            };
            let cand = [
                theta[0] + step[0],
                theta[1] + step[1],
                (theta[2] + step[2]).clamp(-MA_BOUND, MA_BOUND),
            ];
            let c = css(y, [cand[0], cand[1]], cand[2]);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                theta = cand;
                cost = c;
                lambda = (lambda * 0.3).max(1e-12);
                improved = rel > 1e-12;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    ([theta[0], theta[1]], theta[2])
}

/// Fit ARIMA(2,0,1) to a series of at least 20 values.
pub fn arima_fit(series: &[f64]) -> Result<ArimaCoefficients> {
    if series.len() < MIN_FIT_LEN {
        return Err(Error::invalid(alloc::format!(
            "ARIMA fit needs at least {MIN_FIT_LEN} values, got {}",
            series.len()
        )));
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "arima_fit series", index });
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let y: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var = y.iter().map(|v| v * v).sum::<f64>() / n;
    if var <= 1e-14 * (1.0 + mean * mean) {
        return Ok(ArimaCoefficients {
            mean,
            ar: [0.0, 0.0],
            ma: 0.0,
            projected: false,
        });
    }
    let (ar0, ma0) = hannan_rissanen(&y)?;
    let (ar0, _) = project_stationary(ar0);
    let (ar, ma) = refine_css(&y, ar0, ma0);
    let (ar, projected_ar) = project_stationary(ar);
    let projected_ma = math::abs(ma) >= MA_BOUND;
    Ok(ArimaCoefficients {
        mean,
        ar,
        ma: ma.clamp(-MA_BOUND, MA_BOUND),
        projected: projected_ar || projected_ma,
    })
}

/// Forecast `x_{n−1+h}` from the end of `series`; future innovations are zero.
pub fn arima_forecast(coeffs: &ArimaCoefficients, series: &[f64], h: usize) -> Result<f64> {
    Ok(arima_forecast_path(coeffs, series, h)?[h - 1])
}

/// Forecasts for horizons `1..=h_max`.
pub fn arima_forecast_path(coeffs: &ArimaCoefficients, series: &[f64], h_max: usize) -> Result<Vec<f64>> {
    if h_max == 0 {
        return Err(Error::invalid("forecast horizon must be at least 1"));
    }
    if series.len() < 2 {
        return Err(Error::invalid("ARIMA forecast needs at least two past values"));
    }
    let e = coeffs.residuals(series);
    let n = series.len();
    let mut y: Vec<f64> = series[n - 2..].iter().map(|x| x - coeffs.mean).collect();
    let mut last_e = e[n - 1];
    let mut out = Vec::with_capacity(h_max);
    for _ in 0..h_max {
        let len = y.len();
        let next = coeffs.ar[0] * y[len - 1] + coeffs.ar[1] * y[len - 2] + coeffs.ma * last_e;
        last_e = 0.0;
        y.push(next);
        out.push(next + coeffs.mean);
    }
    Ok(out)
}

/// Per-window ARIMA: fits on the window's `column` and forecasts `horizon`
/// steps past its end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArimaPredictor {
    pub column: usize,
    pub horizon: usize,
}

impl Predictor for ArimaPredictor {
    fn output_dim(&self) -> usize {
        1
    }

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        if self.column >= window.cols() {
            return Err(Error::shape("ArimaPredictor column", alloc::format!("< {}", window.cols()), self.column));
        }
        let series = window.column(self.column);
        let coeffs = arima_fit(&series)?;
        Ok(vec![arima_forecast(&coeffs, &series, self.horizon)?])
    }
}
