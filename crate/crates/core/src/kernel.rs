//! Generalized mean shift over a weighted sample set.
//!
//! Profiles receive the *squared* distance `‖q − x‖²`.

use crate::error::{Result, SwarmError};
use crate::geom::Vec2;

/// Fixed-point tolerance on ‖m(x)‖, in position units.
pub const FIXED_POINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `k(r) = exp(-r / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `k(r) = max(0, 1 - r)`; the Epanechnikov profile with unit bandwidth.
    TruncatedQuadratic,
    /// `k(r) = 1` for `r <= radius^2`, else 0.
    Flat { radius: f64 },
}

impl Profile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Profile::Gaussian { sigma } => (-r / (2.0 * sigma * sigma)).exp(),
            Profile::TruncatedQuadratic => (1.0 - r).max(0.0),
            Profile::Flat { radius } => {
                if r <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed-form `∫₀^∞ k(r) dr`.
    pub fn integral(&self) -> f64 {
        match *self {
            Profile::Gaussian { sigma } => 2.0 * sigma * sigma,
            Profile::TruncatedQuadratic => 0.5,
            Profile::Flat { radius } => radius * radius,
        }
    }

    /// Checks the profile conditions by sampling `[0, r_max]` at `n` points:
    /// nonnegative, nonincreasing, no jumps other than downward steps, and a
    /// bounded Riemann sum.
    pub fn satisfies_profile_conditions(&self, r_max: f64, n: usize) -> bool {
        let h = r_max / n as f64;
        let mut prev = self.eval(0.0);
        let mut sum = 0.0;
        for i in 0..=n {
            let k = self.eval(i as f64 * h);
            if !(k.is_finite() && k >= 0.0) || k > prev {
                return false;
            }
            sum += k * h;
            prev = k;
        }
        sum.is_finite() && sum <= self.integral() + self.eval(0.0) * h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    samples: Vec<Vec2>,
    weights: Vec<f64>,
}

impl WeightedSamples {
    pub fn new(samples: Vec<Vec2>, weights: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SwarmError::EmptyKernelSupport);
        }
        if samples.len() != weights.len() {
            return Err(SwarmError::SizeMismatch(samples.len(), weights.len()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(SwarmError::Config("sample weights must be finite and >= 0".into()));
        }
        Ok(WeightedSamples { samples, weights })
    }

    pub fn uniform(samples: Vec<Vec2>) -> Result<Self> {
        let n = samples.len();
        Self::new(samples, vec![1.0; n])
    }

    pub fn samples(&self) -> &[Vec2] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn iter(&self) -> impl Iterator<Item = (&Vec2, f64)> {
        self.samples.iter().zip(self.weights.iter().copied())
    }
}

/// Profile-and-weight normalized average of the samples around `x`.
pub fn sample_mean(x: Vec2, s: &WeightedSamples, k: &Profile) -> Result<Vec2> {
    let mut num = Vec2::zeros();
    let mut den = 0.0;
    for (q, w) in s.iter() {
        let c = k.eval((q - x).norm_squared()) * w;
        num += c * q;
        den += c;
    }
    if den <= 0.0 {
        return Err(SwarmError::EmptyKernelSupport);
    }
    Ok(num / den)
}

pub fn mean_shift(x: Vec2, s: &WeightedSamples, k: &Profile) -> Result<Vec2> {
    Ok(sample_mean(x, s, k)? - x)
}

/// The density whose gradient a gaussian mean shift follows.
pub fn shadow_density(x: Vec2, s: &WeightedSamples, sigma: f64) -> f64 {
    let inv = 1.0 / (2.0 * sigma * sigma);
    s.iter()
        .map(|(q, w)| w * (-(q - x).norm_squared() * inv).exp())
        .sum()
}

#[derive(Debug, Clone)]
pub struct ModeSearch {
    pub mode: Vec2,
    pub iterations: usize,
    pub converged: bool,
    /// Every iterate, starting point included.
    pub path: Vec<Vec2>,
}

/// Iterates `x <- x + m(x)` until `‖m(x)‖ < tol` or `max_iter` is reached.
pub fn seek_mode(
    x0: Vec2,
    s: &WeightedSamples,
    k: &Profile,
    tol: f64,
    max_iter: usize,
) -> Result<ModeSearch> {
    let mut x = x0;
    let mut path = vec![x];
    for it in 0..max_iter {
        let m = mean_shift(x, s, k)?;
        x += m;
        path.push(x);
        if m.norm() < tol {
            return Ok(ModeSearch {
                mode: x,
                iterations: it + 1,
                converged: true,
                path,
            });
        }
    }
    Ok(ModeSearch {
        mode: x,
        iterations: max_iter,
        converged: false,
        path,
    })
}

/// One synchronous update of a set of cluster centers: every center moves
/// using the previous positions only.
pub fn shift_all(centers: &[Vec2], s: &WeightedSamples, k: &Profile) -> Result<Vec<Vec2>> {
    centers.iter().map(|&p| sample_mean(p, s, k)).collect()
}
