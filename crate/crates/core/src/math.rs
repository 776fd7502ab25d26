//! Floating-point helpers routed through `libm` so results are identical on
//! every target, with or without `std`.

use core::f64::consts::PI;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Digamma function ψ(x) for x > 0.
///
/// Shifts the argument above 10 with the recurrence ψ(x) = ψ(x+1) − 1/x and
/// finishes with the asymptotic series; absolute error is below 1e-12 on the
/// positive axis.
pub fn digamma(mut x: f64) -> f64 {
    if x <= 0.0 && floor(x) == x {
        return f64::NAN;
    }
    let mut acc = 0.0;
    if x < 0.0 {
        // Reflection: ψ(1−x) − ψ(x) = π cot(πx)
        return digamma(1.0 - x) - PI / libm::tan(PI * x);
    }
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    acc + ln(x) - 0.5 * inv - series
}
