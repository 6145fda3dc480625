//! Points on the probability simplex, their logit-space preimages, and the
//! maps between them.
//!
//! A `SimplexPoint` over `K` categories carries the full `K`-vector of
//! probabilities; the SDE math operates on the `D = K - 1` free coordinates
//! with the last component implied by the unit-sum constraint. The additive
//! logistic transformation (a softmax over `[y; 0]`) is the bijection from
//! `R^D` onto the simplex interior, and `logit_transform` is its inverse.

use crate::error::{Error, Result};

/// Default interior floor for clamping; keeps logits bounded by about `ln(1/eps)`.
pub const DEFAULT_EPS_INTERIOR: f64 = 1e-5;

/// A probability vector over `K >= 2` categories.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    probs: Vec<f64>,
}

impl SimplexPoint {
    /// Wrap an explicit probability vector. Components must be finite,
    /// non-negative, and sum to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Domain(format!(
                "simplex point needs K >= 2 categories, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Domain(format!(
                    "probability {i} = {p} is not a finite non-negative value"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// The uniform distribution over `k` categories.
    pub fn uniform(k: usize) -> Self {
        assert!(k >= 2, "simplex needs K >= 2");
        Self { probs: vec![1.0 / k as f64; k] }
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    /// Number of free coordinates, `K - 1`.
    pub fn free_dim(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The first `K - 1` components; the last is `1 - sum` by construction.
    pub fn free_coords(&self) -> &[f64] {
        &self.probs[..self.probs.len() - 1]
    }

    /// The reference (last) component.
    pub fn last(&self) -> f64 {
        *self.probs.last().unwrap()
    }

    /// Largest-probability category index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Rebuild a point from free coordinates, clamping the implied full vector
    /// back into the interior. This is how integrator steps re-enter the simplex.
    pub fn from_free_coords(free: &[f64], eps_interior: f64) -> Result<Self> {
        let mut full = Vec::with_capacity(free.len() + 1);
        full.extend_from_slice(free);
        full.push(1.0 - free.iter().sum::<f64>());
        clamp_to_interior(&full, eps_interior)
    }

    /// True when every component lies in `[eps, 1 - eps]` and the sum is 1
    /// within 1e-12.
    pub fn is_interior(&self, eps: f64) -> bool {
        let sum: f64 = self.probs.iter().sum();
        (sum - 1.0).abs() < 1e-12 && self.probs.iter().all(|&p| p >= eps && p <= 1.0 - eps)
    }
}

/// A point in the logit preimage `R^D` of the simplex, `D = K - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector {
    coords: Vec<f64>,
}

impl LogitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("logit vector must be non-empty".into()));
        }
        if let Some((i, &c)) = coords.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::Domain(format!("logit coordinate {i} = {c} is not finite")));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Additive logistic transformation from `R^D` to the simplex over `K = D + 1`
/// categories: `x_i = e^{y_i} / (1 + sum_k e^{y_k})`, `x_K = 1 / (1 + sum_k e^{y_k})`.
///
/// Computed as a shifted softmax over the augmented vector `[y; 0]` so large
/// logits cannot overflow.
pub fn softmax_transform(y: &LogitVector) -> SimplexPoint {
    let mut aug = Vec::with_capacity(y.dim() + 1);
    aug.extend_from_slice(y.coords());
    aug.push(0.0);
    let max = aug.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = aug.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    SimplexPoint { probs }
}

/// Inverse of `softmax_transform`: `y_i = log(x_i / x_K)` for the free
/// coordinates.
///
/// Any strictly positive point inverts; a component at (or below) zero is a
/// boundary error. The `eps_interior` clamp policy is not applied here — the
/// round trip must hold for softmax outputs of logits well beyond `ln(1/eps)`.
pub fn logit_transform(x: &SimplexPoint) -> Result<LogitVector> {
    for (i, &p) in x.probs().iter().enumerate() {
        if !(p > 0.0) {
            return Err(Error::Boundary { index: i, value: p });
        }
    }
    let last = x.last();
    let coords = x.free_coords().iter().map(|&p| (p / last).ln()).collect();
    LogitVector::new(coords)
}

/// Push a raw non-negative vector into the simplex interior: floor every
/// component at `eps_interior`, then renormalize to sum 1. Idempotent.
pub fn clamp_to_interior(raw: &[f64], eps_interior: f64) -> Result<SimplexPoint> {
    if raw.len() < 2 {
        return Err(Error::Domain(format!(
            "simplex point needs K >= 2 categories, got {}",
            raw.len()
        )));
    }
    if !(eps_interior > 0.0 && eps_interior < 1.0 / raw.len() as f64) {
        return Err(Error::Domain(format!(
            "eps_interior = {eps_interior} must lie in (0, 1/K)"
        )));
    }
    for (i, &v) in raw.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain(format!("component {i} = {v} is not finite")));
        }
    }
    let sum: f64 = raw.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Domain(format!("component sum {sum} is not positive")));
    }
    let mut probs: Vec<f64> = raw.iter().map(|&v| v.max(eps_interior)).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    Ok(SimplexPoint { probs })
}

/// Encode a category as a near-one-hot interior point: mass `alpha` on
/// `category`, `(1 - alpha) / (K - 1)` everywhere else.
pub fn onehot_relax(category: usize, k: usize, alpha: f64) -> Result<SimplexPoint> {
    if k < 2 {
        return Err(Error::Domain(format!("K = {k} must be >= 2")));
    }
    if category >= k {
        return Err(Error::Domain(format!("category {category} out of range 0..{k}")));
    }
    if !(alpha > 1.0 / k as f64 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha = {alpha} must lie in (1/K, 1) = ({}, 1)",
            1.0 / k as f64
        )));
    }
    let off = (1.0 - alpha) / (k - 1) as f64;
    let mut probs = vec![off; k];
    probs[category] = alpha;
    Ok(SimplexPoint { probs })
}
