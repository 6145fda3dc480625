//! Brute-force verifiers used by the test suite and the `verify` command.
//!
//! Nothing here touches the closed-form drift/diffusion/score implementations
//! it is used to check: estimates are built from central finite differences
//! and from exact Gaussian transitions pushed through the softmax. That
//! independence is what makes these usable as arbiters.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ou::OuProcess;
use crate::simplex::{logit_transform, softmax_transform, LogitVector, SimplexPoint};

/// Default step for central-difference gradient checks (the 64-bit sweet spot).
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Defaults for Monte-Carlo drift/diffusion estimation.
pub const DEFAULT_MC_STEP: f64 = 1e-4;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Sample moments of a vector-valued Monte-Carlo experiment.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    pub cov: Array2<f64>,
    /// Standard error of each mean component: sample std / sqrt(N).
    pub std_err: Vec<f64>,
    pub n: usize,
}

/// Central finite differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_diff_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// Estimate the drift vector and diffusion product of the simplex process at
/// `x0` from `n` exact one-step transitions of duration `h`.
///
/// Each draw advances the logit state by the exact Gaussian transition and
/// pushes the result through the softmax, so the only bias against the true
/// instantaneous coefficients is the O(h) truncation of the increment itself.
/// Reports `mean(dx)/h` with standard errors and `cov(dx)/h`.
pub fn mc_drift_diffusion<R: Rng + ?Sized>(
    x0: &SimplexPoint,
    ou: &OuProcess,
    h: f64,
    n: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::Domain(format!("h = {h} must lie in (0, 1e-3]")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be >= 2")));
    }
    let d = x0.free_dim();
    let y0 = logit_transform(x0)?;
    let (mean_y, var) = ou.transition(&y0, h)?;
    let sd = var.sqrt();

    let mut sum = vec![0.0; d];
    let mut cross = vec![0.0; d * d];
    let mut deltas = vec![0.0; d];
    let mut coords = vec![0.0; d];
    for _ in 0..n {
        for (c, &m) in coords.iter_mut().zip(&mean_y) {
            *c = m + sd * rng.sample::<f64, _>(StandardNormal);
        }
        let x = softmax_transform(&LogitVector::new(coords.clone())?);
        for i in 0..d {
            deltas[i] = x.free_coords()[i] - x0.free_coords()[i];
            sum[i] += deltas[i];
        }
        for i in 0..d {
            for j in 0..d {
                cross[i * d + j] += deltas[i] * deltas[j];
            }
        }
    }

    let nf = n as f64;
    let mean_dx: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let mut cov = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            let c = (cross[i * d + j] - nf * mean_dx[i] * mean_dx[j]) / (nf - 1.0);
            cov[[i, j]] = c / h;
        }
    }
    let std_err: Vec<f64> = (0..d)
        .map(|i| {
            let var_i = (cross[i * d + i] / nf - mean_dx[i] * mean_dx[i]).max(0.0);
            (var_i / nf).sqrt() / h
        })
        .collect();
    Ok(McEstimate {
        mean: mean_dx.iter().map(|m| m / h).collect(),
        cov,
        std_err,
        n,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical CDFs.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("ks_distance needs non-empty samples".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS input"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS input"));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut gap = 0.0f64;
    // Consume tied values on both sides together so equal samples measure 0.
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] == x {
            i += 1;
        }
        while j < sb.len() && sb[j] == x {
            j += 1;
        }
        gap = gap.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(gap.max(1.0 - (i as f64 / na).min(j as f64 / nb)))
}

/// Total-variation distance between two empirical categorical distributions,
/// `0.5 * sum_i |p_a(i) - p_b(i)|`.
pub fn categorical_tv(counts_a: &[u64], counts_b: &[u64]) -> Result<f64> {
    if counts_a.len() != counts_b.len() {
        return Err(Error::Shape(format!(
            "category counts differ in length: {} vs {}",
            counts_a.len(),
            counts_b.len()
        )));
    }
    let ta: u64 = counts_a.iter().sum();
    let tb: u64 = counts_b.iter().sum();
    if ta == 0 || tb == 0 {
        return Err(Error::Domain("categorical_tv needs non-zero totals".into()));
    }
    let mut tv = 0.0;
    for (&a, &b) in counts_a.iter().zip(counts_b) {
        tv += (a as f64 / ta as f64 - b as f64 / tb as f64).abs();
    }
    Ok(0.5 * tv)
}
