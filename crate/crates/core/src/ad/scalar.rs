use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::tape::Var;

/// Numeric type the geometry and logic layers are written against.
///
/// `f64` evaluates values only; [`Var`] records the same computation on a tape.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(self) -> f64;
    /// A constant living wherever `self` lives (same tape for `Var`).
    fn constant_like(self, c: f64) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn square(self) -> Self;
    fn relu(self) -> Self;
    fn sigmoid(self) -> Self;
    fn abs_smooth(self, eps: f64) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn min2(self, other: Self) -> Self;
    fn max2(self, other: Self) -> Self;
    /// Max-shifted LogSumExp; callers guarantee `xs` is non-empty and `tau > 0`.
    fn lse_max_unchecked(xs: &[Self], tau: f64) -> Self;
    fn lse_min_unchecked(xs: &[Self], tau: f64) -> Self;
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Returns the smooth extreme and its softmax weights. `sign = 1` for max,
/// `-1` for min.
pub(crate) fn lse_with_weights(xs: &[f64], tau: f64, sign: f64) -> (f64, Vec<f64>) {
    let pivot = if sign > 0.0 {
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        xs.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let terms: Vec<f64> = xs.iter().map(|&x| (sign * (x - pivot) / tau).exp()).collect();
    let sum: f64 = terms.iter().sum();
    let value = pivot + sign * tau * sum.ln();
    let weights = terms.into_iter().map(|t| t / sum).collect();
    (value, weights)
}

fn lse_value(xs: &[f64], tau: f64, sign: f64) -> f64 {
    if xs.len() == 1 {
        return xs[0];
    }
    let pivot = if sign > 0.0 {
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        xs.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let sum: f64 = xs.iter().map(|&x| (sign * (x - pivot) / tau).exp()).sum();
    pivot + sign * tau * sum.ln()
}

impl Scalar for f64 {
    fn value(self) -> f64 {
        self
    }
    fn constant_like(self, c: f64) -> Self {
        c
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn square(self) -> Self {
        self * self
    }
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }
    fn abs_smooth(self, eps: f64) -> Self {
        (self * self + eps).sqrt()
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn min2(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
    fn max2(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn lse_max_unchecked(xs: &[Self], tau: f64) -> Self {
        lse_value(xs, tau, 1.0)
    }
    fn lse_min_unchecked(xs: &[Self], tau: f64) -> Self {
        lse_value(xs, tau, -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(self) -> f64 {
        Var::value(&self)
    }
    fn constant_like(self, c: f64) -> Self {
        Var::constant_like(self, c)
    }
    fn sqrt(self) -> Self {
        Var::sqrt(self)
    }
    fn exp(self) -> Self {
        Var::exp(self)
    }
    fn ln(self) -> Self {
        Var::ln(self)
    }
    fn sin(self) -> Self {
        Var::sin(self)
    }
    fn cos(self) -> Self {
        Var::cos(self)
    }
    fn square(self) -> Self {
        Var::square(self)
    }
    fn relu(self) -> Self {
        Var::relu(self)
    }
    fn sigmoid(self) -> Self {
        Var::sigmoid(self)
    }
    fn abs_smooth(self, eps: f64) -> Self {
        Var::abs_smooth(self, eps)
    }
    fn atan2(self, x: Self) -> Self {
        Var::atan2(self, x)
    }
    fn min2(self, other: Self) -> Self {
        Var::min2(self, other)
    }
    fn max2(self, other: Self) -> Self {
        Var::max2(self, other)
    }
    fn lse_max_unchecked(xs: &[Self], tau: f64) -> Self {
        Var::lse(xs, tau, true)
    }
    fn lse_min_unchecked(xs: &[Self], tau: f64) -> Self {
        Var::lse(xs, tau, false)
    }
}
