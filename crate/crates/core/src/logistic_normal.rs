//! The logistic-normal distribution: the law of `softmax_transform` applied to
//! a Gaussian. This is the transition-kernel family of the forward process,
//! restricted to isotropic covariance `v * I` — the only case the
//! mean-reverting kernel ever produces.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::simplex::{softmax_transform, LogitVector, SimplexPoint};

/// Parameters of a logistic-normal over `K = D + 1` categories: logit-space
/// mean `mu` (length `D`) and isotropic logit-space variance `var`.
///
/// `var = 0` is the degenerate point mass at `softmax(mu)`; it can be sampled
/// but has no density.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticNormal {
    mu: Vec<f64>,
    var: f64,
}

impl LogisticNormal {
    pub fn new(mu: Vec<f64>, var: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Domain("mu must be non-empty".into()));
        }
        if let Some((i, &m)) = mu.iter().enumerate().find(|(_, m)| !m.is_finite()) {
            return Err(Error::Domain(format!("mu[{i}] = {m} is not finite")));
        }
        if !(var >= 0.0) || !var.is_finite() {
            return Err(Error::Domain(format!("variance {var} must be finite and >= 0")));
        }
        Ok(Self { mu, var })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn var(&self) -> f64 {
        self.var
    }

    /// Dimension of the logit space, `D = K - 1`.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    fn check_point(&self, x: &SimplexPoint) -> Result<()> {
        if x.free_dim() != self.dim() {
            return Err(Error::Shape(format!(
                "point has K = {} but kernel expects K = {}",
                x.k(),
                self.dim() + 1
            )));
        }
        for (i, &p) in x.probs().iter().enumerate() {
            if !(p > 0.0) {
                return Err(Error::Boundary { index: i, value: p });
            }
        }
        if self.var <= 0.0 {
            return Err(Error::Domain("degenerate kernel (var = 0) has no density".into()));
        }
        Ok(())
    }

    /// Log-density with respect to Lebesgue measure on the free coordinates:
    /// `-(D/2) ln(2 pi v) - sum_i ln x_i - |logit(x) - mu|^2 / (2v)`,
    /// the product over all `K` components.
    pub fn log_pdf(&self, x: &SimplexPoint) -> Result<f64> {
        self.check_point(x)?;
        let d = self.dim() as f64;
        let mut quad = 0.0;
        let last = x.last();
        for (xi, mi) in x.free_coords().iter().zip(&self.mu) {
            let gamma = (xi / last).ln() - mi;
            quad += gamma * gamma;
        }
        let log_prod: f64 = x.probs().iter().map(|p| p.ln()).sum();
        Ok(-0.5 * d * (2.0 * std::f64::consts::PI * self.var).ln() - log_prod
            - quad / (2.0 * self.var))
    }

    /// Closed-form gradient of `log_pdf` with respect to the `D` free
    /// coordinates (the last component is the implied `1 - sum` while
    /// differentiating):
    ///
    /// `score_i = -(1/(v x_K)) sum_k gamma_k - (1/(v x_i)) gamma_i + (x_i - x_K)/(x_i x_K)`
    ///
    /// with `gamma_k = log(x_k / x_K) - mu_k`.
    pub fn score(&self, x: &SimplexPoint) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let last = x.last();
        let gammas: Vec<f64> = x
            .free_coords()
            .iter()
            .zip(&self.mu)
            .map(|(xi, mi)| (xi / last).ln() - mi)
            .collect();
        let gamma_sum: f64 = gammas.iter().sum();
        let v = self.var;
        Ok(x.free_coords()
            .iter()
            .zip(&gammas)
            .map(|(&xi, &gi)| {
                -gamma_sum / (v * last) - gi / (v * xi) + (xi - last) / (xi * last)
            })
            .collect())
    }

    /// Draw `softmax(mu + sqrt(v) * xi)` with `xi` standard normal; the
    /// degenerate kernel returns `softmax(mu)` exactly.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SimplexPoint {
        let sd = self.var.sqrt();
        let coords: Vec<f64> = self
            .mu
            .iter()
            .map(|&m| {
                if sd > 0.0 {
                    m + sd * rng.sample::<f64, _>(StandardNormal)
                } else {
                    m
                }
            })
            .collect();
        softmax_transform(&LogitVector::new(coords).expect("finite logits"))
    }
}
