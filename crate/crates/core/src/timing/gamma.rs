//! Gamma distribution in shape/scale form and its maximum likelihood fit.

use serde::{Deserialize, Serialize};

use super::special::{digamma, ln_gamma, trigamma};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample variance below this (ms²) is raised to it before fitting.
pub const VARIANCE_FLOOR_MS2: f64 = 1.0;

const MAX_NEWTON_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaParams<T> {
    pub shape: T,
    pub scale: T,
}

impl<T: Real> GammaParams<T> {
    pub fn new(shape: T, scale: T) -> Result<Self> {
        if !(shape > T::zero() && shape.is_finite() && scale > T::zero() && scale.is_finite()) {
            return Err(Error::domain(format!(
                "gamma parameters must be positive and finite (shape={shape}, scale={scale})"
            )));
        }
        Ok(GammaParams { shape, scale })
    }

    pub fn mean(&self) -> T {
        self.shape * self.scale
    }

    pub fn variance(&self) -> T {
        self.shape * self.scale * self.scale
    }

    /// Location of the density maximum; 0 when shape ≤ 1.
    pub fn mode(&self) -> T {
        if self.shape >= T::one() {
            (self.shape - T::one()) * self.scale
        } else {
            T::zero()
        }
    }

    /// Log density at `x`; `-inf` for `x ≤ 0`.
    pub fn ln_pdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::neg_infinity();
        }
        let k = self.shape;
        (k - T::one()) * x.ln() - x / self.scale - ln_gamma(k) - k * self.scale.ln()
    }

    pub fn pdf(&self, x: T) -> T {
        self.ln_pdf(x).exp()
    }
}

/// Result of [`fit_gamma`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFit<T> {
    pub params: GammaParams<T>,
    /// True when the variance floor replaced the likelihood fit.
    pub floored: bool,
}

/// Maximum likelihood gamma fit.
///
/// Newton's method on the shape equation `ln k − ψ(k) = ln x̄ − mean(ln x)`,
/// started from the closed-form approximation `(3 − s + √((s−3)² + 24s)) / 12s`.
/// The scale follows as `x̄ / k`. If the sample variance is under
/// [`VARIANCE_FLOOR_MS2`] the likelihood equation is singular or nearly so,
/// and moment estimates with the floored variance are returned instead.
pub fn fit_gamma<T: Real>(samples: &[T]) -> Result<GammaFit<T>> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples to fit".into()));
    }
    if let Some(bad) = samples.iter().find(|x| !(**x > T::zero() && x.is_finite())) {
        return Err(Error::domain(format!("latency must be positive and finite, got {bad}")));
    }
    let n = T::of_usize(samples.len());
    let mean = samples.iter().copied().sum::<T>() / n;
    let variance = if samples.len() > 1 {
        samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one())
    } else {
        T::zero()
    };
    let floor = T::lit(VARIANCE_FLOOR_MS2);
    if variance < floor {
        return moment_fit(mean, floor, true);
    }

    let mean_ln = samples.iter().map(|x| x.ln()).sum::<T>() / n;
    let s = mean.ln() - mean_ln;
    // Jensen gap collapses to rounding noise only for near-constant data.
    if !(s > T::epsilon() * T::lit(16.0)) {
        return moment_fit(mean, variance, false);
    }

    let three = T::lit(3.0);
    let mut k = (three - s + ((s - three).powi(2) + T::lit(24.0) * s).sqrt()) / (T::lit(12.0) * s);
    let tol = T::epsilon().sqrt() * T::lit(1e-4);
    for _ in 0..MAX_NEWTON_ITERS {
        let f = k.ln() - digamma(k) - s;
        let df = k.recip() - trigamma(k);
        let mut next = k - f / df;
        if !(next > T::zero()) || !next.is_finite() {
            next = k / T::lit(2.0);
        }
        let done = ((next - k) / k).abs() < tol;
        k = next;
        if done {
            break;
        }
    }
    Ok(GammaFit {
        params: GammaParams::new(k, mean / k)?,
        floored: false,
    })
}

fn moment_fit<T: Real>(mean: T, variance: T, floored: bool) -> Result<GammaFit<T>> {
    Ok(GammaFit {
        params: GammaParams::new(mean * mean / variance, variance / mean)?,
        floored,
    })
}
