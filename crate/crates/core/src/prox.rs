//! Scalar losses and proximity operators.
//!
//! The HOW loss `l(x)` equals `x²/2` on `[-λ, λ]` and a shifted Welsch bump
//! outside. Writing `f(x) = x²/2 - l(x)` gives a convex function whose
//! derivative is the proximity operator of the implicit regularizer `φ`
//! defined by `l(x) = min_y (y - x)²/2 + λ φ(y)`.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Threshold `λ` and kernel size `σ` of the HOW loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HowParams<T: Scalar> {
    pub lambda: T,
    pub sigma: T,
}

impl<T: Scalar> HowParams<T> {
    pub fn new(lambda: T, sigma: T) -> Result<Self> {
        let p = Self { lambda, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(Float::is_finite(self.sigma) && self.sigma > T::zero()) {
            return Err(Error::invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(Float::is_finite(self.lambda) && self.lambda >= T::zero()) {
            return Err(Error::invalid(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `σ ≤ √2 λ`: the regime where `φ` is concave on `y > 0`.
    pub fn quasiconvex_regime(&self) -> bool {
        self.sigma <= Float::sqrt(T::lit(2.0)) * self.lambda
    }

    /// Upper bound `σ²/2 + λ²/2` of the loss.
    pub fn loss_bound(&self) -> T {
        let half = T::lit(0.5);
        half * self.sigma * self.sigma + half * self.lambda * self.lambda
    }
}

#[inline]
fn shrink_factor<T: Scalar>(x: T, threshold: T, sigma: T) -> T {
    Float::exp((threshold * threshold - x * x) / (sigma * sigma))
}

pub fn how_loss<T: Scalar>(x: T, p: &HowParams<T>) -> T {
    let half = T::lit(0.5);
    if Float::abs(x) <= p.lambda {
        half * x * x
    } else {
        let s2 = p.sigma * p.sigma;
        half * s2 * (T::one() - shrink_factor(x, p.lambda, p.sigma)) + half * p.lambda * p.lambda
    }
}

/// Welsch loss `(σ²/2)(1 - exp(-x²/σ²))`, the `λ = 0` case of HOW.
pub fn welsch_loss<T: Scalar>(x: T, sigma: T) -> T {
    let s2 = sigma * sigma;
    T::lit(0.5) * s2 * (T::one() - Float::exp(-(x * x) / s2))
}

/// `x²/2 - how_loss(x)`. Convex and even, identically zero on `[-λ, λ]`.
pub fn f_gap<T: Scalar>(x: T, p: &HowParams<T>) -> T {
    if Float::abs(x) <= p.lambda {
        return T::zero();
    }
    T::lit(0.5) * x * x - how_loss(x, p)
}

/// Closed-form proximity operator of the HOW implicit regularizer.
///
/// `max{0, |x| - |x| exp((t² - x²)/σ²)} sign(x)`, with dead zone `|x| ≤ t`.
#[inline]
pub fn prox_how<T: Scalar>(x: T, threshold: T, sigma: T) -> T {
    let ax = Float::abs(x);
    if ax <= threshold {
        return T::zero();
    }
    let mag = ax - ax * shrink_factor(x, threshold, sigma);
    Float::max(mag, T::zero()) * Float::signum(x)
}

/// Soft thresholding.
#[inline]
pub fn prox_l1<T: Scalar>(x: T, threshold: T) -> T {
    Float::max(Float::abs(x) - threshold, T::zero()) * Float::signum(x)
}

/// `x - x exp(-x²/σ²)`; zero only at `x = 0`.
#[inline]
pub fn prox_welsch<T: Scalar>(x: T, sigma: T) -> T {
    x - x * Float::exp(-(x * x) / (sigma * sigma))
}

const PHI_BISECTION_TOL: f64 = 1e-12;
const PHI_BISECTION_MAX_ITER: usize = 200;

/// Numeric value of the implicit regularizer `φ(y)`.
///
/// Inverts the proximity operator by bisection to find `x*` with
/// `prox_how(x*) = |y|`, then reads `φ` off the envelope identity
/// `λ φ(y) = l(x*) - (y - x*)²/2`. Requires `λ > 0`.
pub fn phi_numeric<T: Scalar>(y: T, p: &HowParams<T>) -> Result<T> {
    p.validate()?;
    if p.lambda <= T::zero() {
        return Err(Error::Unsupported(
            "implicit regularizer needs lambda > 0".to_string(),
        ));
    }
    if !Float::is_finite(y) {
        return Err(Error::invalid(format!("phi of non-finite value {y}")));
    }
    let target = Float::abs(y);
    if target == T::zero() {
        return Ok(T::zero());
    }

    let prox = |x: T| prox_how(x, p.lambda, p.sigma);
    let mut lo = p.lambda;
    let mut hi = p.lambda + target + T::lit(10.0) * p.sigma;
    if prox(hi) < target {
        return Err(Error::Numeric(format!(
            "phi bisection bracket [{lo}, {hi}] does not contain prox^-1({target})"
        )));
    }
    let tol = T::lit(PHI_BISECTION_TOL);
    for _ in 0..PHI_BISECTION_MAX_ITER {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if prox(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    let x_star = T::lit(0.5) * (lo + hi);
    let gap = target - x_star;
    Ok((how_loss(x_star, p) - T::lit(0.5) * gap * gap) / p.lambda)
}
