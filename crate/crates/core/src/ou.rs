//! Mean-reverting Gaussian noising in logit space and its pushforward onto
//! the simplex.
//!
//! The logit-space process `dY = -theta * Y dt + dW` has the exact transition
//! `N(y0 * exp(-theta t), v(t) I)` with `v(t) = (1 - exp(-2 theta t)) / (2 theta)`,
//! so the simplex-valued forward kernel is logistic-normal with those
//! parameters and never needs to be integrated numerically.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::logistic_normal::LogisticNormal;
use crate::simplex::{logit_transform, softmax_transform, LogitVector, SimplexPoint};

/// Mean-reversion rate of the logit-space process; the diffusion coefficient
/// is fixed at 1, so `theta` alone sets the limiting variance `1/(2 theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuProcess {
    theta: f64,
}

impl OuProcess {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("theta = {theta} must be positive and finite")));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Variance of the `t -> infinity` logit distribution, `1 / (2 theta)`.
    pub fn limiting_variance(&self) -> f64 {
        1.0 / (2.0 * self.theta)
    }

    /// Per-time variance `v(t) = (1 - exp(-2 theta t)) / (2 theta)`.
    pub fn variance_at(&self, t: f64) -> f64 {
        (1.0 - (-2.0 * self.theta * t).exp()) / (2.0 * self.theta)
    }

    /// Exact logit-space transition: mean `y0 * exp(-theta t)` and isotropic
    /// variance `v(t)`.
    pub fn transition(&self, y0: &LogitVector, t: f64) -> Result<(Vec<f64>, f64)> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("t = {t} must be finite and >= 0")));
        }
        let decay = (-self.theta * t).exp();
        let mean = y0.coords().iter().map(|&y| y * decay).collect();
        Ok((mean, self.variance_at(t)))
    }

    /// The simplex transition kernel from `x0` over duration `t`: a
    /// logistic-normal with mean `logit(x0) * exp(-theta t)` and variance `v(t)`.
    pub fn forward_kernel(&self, x0: &SimplexPoint, t: f64) -> Result<LogisticNormal> {
        let y0 = logit_transform(x0)?;
        let (mean, var) = self.transition(&y0, t)?;
        LogisticNormal::new(mean, var)
    }

    /// Draw from the forward kernel. `t = 0` returns `x0` exactly rather than
    /// sampling the degenerate kernel.
    pub fn forward_sample<R: Rng + ?Sized>(
        &self,
        x0: &SimplexPoint,
        t: f64,
        rng: &mut R,
    ) -> Result<SimplexPoint> {
        if t == 0.0 {
            return Ok(x0.clone());
        }
        Ok(self.forward_kernel(x0, t)?.sample(rng))
    }

    /// Draw from the limiting distribution over `k` categories: the softmax of
    /// a centered Gaussian with variance `1/(2 theta)` per coordinate. This is
    /// how reverse sampling is initialized.
    pub fn limiting_sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<SimplexPoint> {
        if k < 2 {
            return Err(Error::Domain(format!("K = {k} must be >= 2")));
        }
        let sd = self.limiting_variance().sqrt();
        let coords: Vec<f64> = (0..k - 1)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(softmax_transform(&LogitVector::new(coords)?))
    }
}
