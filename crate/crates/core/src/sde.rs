//! The simplex-valued SDE obtained by pushing the logit-space process through
//! the additive logistic transformation: drift, diffusion matrix, the product
//! `G G^T`, its row divergence, a forward Euler-Maruyama step, and the
//! unit-cube product extension.
//!
//! All coefficients are indexed over the `D = K - 1` free coordinates; the
//! last component of a point is implied by the unit-sum constraint.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ou::OuProcess;
use crate::simplex::{logit_transform, SimplexPoint};

/// Drift vector and diffusion matrix of the simplex SDE at one point.
#[derive(Debug, Clone)]
pub struct SdeCoefficients {
    pub drift: Vec<f64>,
    pub diffusion: Array2<f64>,
}

/// Both coefficients at once.
pub fn coefficients(x: &SimplexPoint, ou: &OuProcess) -> Result<SdeCoefficients> {
    Ok(SdeCoefficients { drift: drift(x, ou)?, diffusion: diffusion_matrix(x) })
}

/// The diffusion coefficient matrix: `G_ii = x_i (1 - x_i)`, `G_ij = -x_i x_j`.
///
/// This is also the Jacobian of the softmax with respect to the logits, which
/// is why it shows up as the noise coefficient of the pushforward process.
pub fn diffusion_matrix(x: &SimplexPoint) -> Array2<f64> {
    let free = x.free_coords();
    let d = free.len();
    let mut g = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            g[[i, j]] = if i == j { free[i] * (1.0 - free[i]) } else { -free[i] * free[j] };
        }
    }
    g
}

/// Drift of the simplex process, assembled from the chain rule for the
/// softmax: the mean-reversion term `-theta * G(x) * logit(x)` plus half the
/// trace-of-Hessian correction,
///
/// `f_i = -theta sum_j G_ij y_j + 1/2 [ x_i(1-x_i)(1-2x_i) - sum_{j != i} x_i x_j (1-2x_j) ]`.
pub fn drift(x: &SimplexPoint, ou: &OuProcess) -> Result<Vec<f64>> {
    let y = logit_transform(x)?;
    let free = x.free_coords();
    let d = free.len();
    let theta = ou.theta();
    let mut f = Vec::with_capacity(d);
    for i in 0..d {
        let xi = free[i];
        let mut reversion = xi * (1.0 - xi) * y.coords()[i];
        let mut correction = xi * (1.0 - xi) * (1.0 - 2.0 * xi);
        for j in 0..d {
            if j != i {
                reversion -= xi * free[j] * y.coords()[j];
                correction -= xi * free[j] * (1.0 - 2.0 * free[j]);
            }
        }
        f.push(-theta * reversion + 0.5 * correction);
    }
    Ok(f)
}

/// Closed form of `H = G G^T`:
///
/// `H_ii = x_i^2 ((1-x_i)^2 + sum_{k != i} x_k^2)`,
/// `H_ij = -x_i x_j (x_i(1-x_i) + x_j(1-x_j) - sum_{k != i,j} x_k^2)`,
///
/// with all sums over the free coordinates.
pub fn diffusion_gram(x: &SimplexPoint) -> Array2<f64> {
    let free = x.free_coords();
    let d = free.len();
    let sq_sum: f64 = free.iter().map(|v| v * v).sum();
    let mut h = Array2::zeros((d, d));
    for i in 0..d {
        let xi = free[i];
        h[[i, i]] = xi * xi * ((1.0 - xi) * (1.0 - xi) + (sq_sum - xi * xi));
        for j in 0..i {
            let xj = free[j];
            let rest = sq_sum - xi * xi - xj * xj;
            let val = -xi * xj * (xi * (1.0 - xi) + xj * (1.0 - xj) - rest);
            h[[i, j]] = val;
            h[[j, i]] = val;
        }
    }
    h
}

/// Row divergence of `H`: `d_i = sum_j dH_ij / dx_j`, in closed form.
pub fn diffusion_gram_divergence(x: &SimplexPoint) -> Vec<f64> {
    let free = x.free_coords();
    let d = free.len();
    let sq_sum: f64 = free.iter().map(|v| v * v).sum();
    let mut div = Vec::with_capacity(d);
    for i in 0..d {
        let xi = free[i];
        // d/dx_i of H_ii = x_i^2 ((1-x_i)^2 + S - x_i^2), treating the other
        // coordinates as constants: product rule on x_i^2 * a(x_i) with
        // a'(x_i) = -2(1-x_i) - 2x_i + ... folded below.
        let a = (1.0 - xi) * (1.0 - xi) + (sq_sum - xi * xi);
        let da = -2.0 * (1.0 - xi); // from (1-x_i)^2; the -x_i^2 inside S - x_i^2 cancels S's x_i term
        let mut total = 2.0 * xi * a + xi * xi * da;
        for j in 0..d {
            if j == i {
                continue;
            }
            let xj = free[j];
            let b = xi * (1.0 - xi) + xj * (1.0 - xj) - (sq_sum - xi * xi - xj * xj);
            // d/dx_j of H_ij = -x_i x_j b: both the x_j factor and b vary.
            total += -xi * b - xi * xj * (1.0 - 2.0 * xj);
        }
        div.push(total);
    }
    div
}

/// One forward Euler-Maruyama step of length `h`:
/// `x' = clamp(x + f(x) h + G(x) sqrt(h) xi)` with `xi` standard normal.
///
/// Exists for validating the closed-form kernel; training and sampling use the
/// exact kernel directly.
pub fn euler_maruyama_step<R: Rng + ?Sized>(
    x: &SimplexPoint,
    ou: &OuProcess,
    h: f64,
    eps_interior: f64,
    rng: &mut R,
) -> Result<SimplexPoint> {
    if !(h > 0.0 && h <= 0.01) {
        return Err(Error::StepSize(h));
    }
    let d = x.free_dim();
    let f = drift(x, ou)?;
    let g = diffusion_matrix(x);
    let noise: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let sqrt_h = h.sqrt();
    let mut free = x.free_coords().to_vec();
    for i in 0..d {
        let mut diff = 0.0;
        for j in 0..d {
            diff += g[[i, j]] * noise[j];
        }
        free[i] += f[i] * h + sqrt_h * diff;
    }
    SimplexPoint::from_free_coords(&free, eps_interior)
}

/// Forward kernel of the unit-cube process: each coordinate is an independent
/// two-category simplex, so `mu_j = log(x_j / (1 - x_j)) * exp(-theta t)` with
/// the shared variance `v(t)`.
pub fn cube_kernel_params(x0: &[f64], t: f64, ou: &OuProcess) -> Result<(Vec<f64>, f64)> {
    if x0.is_empty() {
        return Err(Error::Domain("cube point must be non-empty".into()));
    }
    let mut mu = Vec::with_capacity(x0.len());
    let decay = (-ou.theta() * t).exp();
    for (i, &c) in x0.iter().enumerate() {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Boundary { index: i, value: c });
        }
        mu.push((c / (1.0 - c)).ln() * decay);
    }
    Ok((mu, ou.variance_at(t)))
}

/// Draw from the cube kernel: per-coordinate sigmoid of the Gaussian, so the
/// sample lies strictly inside `(0,1)^n`.
pub fn cube_forward_sample<R: Rng + ?Sized>(
    x0: &[f64],
    t: f64,
    ou: &OuProcess,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (mu, var) = cube_kernel_params(x0, t, ou)?;
    let sd = var.sqrt();
    Ok(mu
        .iter()
        .map(|&m| {
            let y = m + sd * rng.sample::<f64, _>(StandardNormal);
            // sigmoid via the stable branch
            if y >= 0.0 {
                1.0 / (1.0 + (-y).exp())
            } else {
                let e = y.exp();
                e / (1.0 + e)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::mc_drift_diffusion;
    use crate::simplex::{softmax_transform, LogitVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point(probs: &[f64]) -> SimplexPoint {
        SimplexPoint::new(probs.to_vec()).unwrap()
    }

    fn random_interior(k: usize, rng: &mut ChaCha8Rng) -> SimplexPoint {
        let coords: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(-1.5..1.5)).collect();
        softmax_transform(&LogitVector::new(coords).unwrap())
    }

    #[test]
    fn diffusion_matrix_small_cases() {
        let g = diffusion_matrix(&point(&[0.5, 0.5]));
        assert_eq!(g[[0, 0]], 0.25);

        let g = diffusion_matrix(&SimplexPoint::uniform(3));
        assert!((g[[0, 0]] - 2.0 / 9.0).abs() < 1e-15);
        assert!((g[[0, 1]] + 1.0 / 9.0).abs() < 1e-15);
        assert!((g[[1, 0]] + 1.0 / 9.0).abs() < 1e-15);
        assert!((g[[1, 1]] - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn diffusion_matrix_is_diag_minus_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in [2usize, 3, 5] {
            for _ in 0..20 {
                let x = random_interior(k, &mut rng);
                let g = diffusion_matrix(&x);
                let free = x.free_coords();
                for i in 0..k - 1 {
                    for j in 0..k - 1 {
                        let expected =
                            if i == j { free[i] } else { 0.0 } - free[i] * free[j];
                        assert!((g[[i, j]] - expected).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn diffusion_matrix_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [2usize, 3, 5, 8] {
            for _ in 0..50 {
                let x = random_interior(k, &mut rng);
                let g = diffusion_matrix(&x);
                // random quadratic forms stay non-negative
                for _ in 0..20 {
                    let z: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let mut q = 0.0;
                    for i in 0..k - 1 {
                        for j in 0..k - 1 {
                            q += z[i] * g[[i, j]] * z[j];
                        }
                    }
                    assert!(q >= -1e-12, "quadratic form {q} at K={k}");
                }
            }
        }
        // D = 2: both eigenvalues explicitly
        for _ in 0..50 {
            let x = random_interior(3, &mut rng);
            let g = diffusion_matrix(&x);
            let tr = g[[0, 0]] + g[[1, 1]];
            let det = g[[0, 0]] * g[[1, 1]] - g[[0, 1]] * g[[1, 0]];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            assert!(tr / 2.0 - disc >= -1e-12);
        }
    }

    #[test]
    fn drift_vanishes_at_the_k2_midpoint() {
        for theta in [1.0, 20.0, 300.0] {
            let ou = OuProcess::new(theta).unwrap();
            let f = drift(&point(&[0.5, 0.5]), &ou).unwrap();
            assert!(f[0].abs() < 1e-15);
        }
    }

    #[test]
    fn drift_at_the_k3_barycenter_is_the_ito_correction() {
        let ou = OuProcess::new(20.0).unwrap();
        let f = drift(&SimplexPoint::uniform(3), &ou).unwrap();
        for c in &f {
            assert!((c - 1.0 / 54.0).abs() < 1e-15, "got {c}");
        }
    }

    #[test]
    fn drift_matches_monte_carlo_increments() {
        // K=2, theta=20, x0=[0.9,0.1]: E[dX]/h from exact one-step transitions
        // within 3 standard errors; covariance within 5% of H.
        let ou = OuProcess::new(20.0).unwrap();
        let x0 = point(&[0.9, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let est = mc_drift_diffusion(&x0, &ou, 1e-4, 100_000, &mut rng).unwrap();
        let f = drift(&x0, &ou).unwrap();
        assert!(
            (est.mean[0] - f[0]).abs() < 3.0 * est.std_err[0],
            "mc {} vs closed {} (se {})",
            est.mean[0],
            f[0],
            est.std_err[0]
        );
        let h = diffusion_gram(&x0);
        assert!((est.cov[[0, 0]] - h[[0, 0]]).abs() / h[[0, 0]] < 0.05);
    }

    #[test]
    fn gram_small_cases() {
        let h = diffusion_gram(&point(&[0.5, 0.5]));
        assert!((h[[0, 0]] - 0.0625).abs() < 1e-15);

        let h = diffusion_gram(&SimplexPoint::uniform(3));
        assert!((h[[0, 0]] - 5.0 / 81.0).abs() < 1e-15);
        assert!((h[[0, 1]] + 4.0 / 81.0).abs() < 1e-15);
        assert!((h[[1, 1]] - 5.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn gram_matches_numeric_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in [2usize, 3, 5, 7] {
            for _ in 0..30 {
                let x = random_interior(k, &mut rng);
                let g = diffusion_matrix(&x);
                let numeric = g.dot(&g.t());
                let closed = diffusion_gram(&x);
                let max_diff = numeric
                    .iter()
                    .zip(closed.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                assert!(max_diff < 1e-12, "K={k} max diff {max_diff}");
            }
        }
    }

    fn divergence_fd(x: &SimplexPoint, h: f64) -> Vec<f64> {
        // central differences of the closed-form H along each free coordinate;
        // H never reads the implied last component, but keep points valid.
        let free = x.free_coords();
        let d = free.len();
        let mut div = vec![0.0; d];
        for j in 0..d {
            let mut up = free.to_vec();
            up[j] += h;
            let mut down = free.to_vec();
            down[j] -= h;
            let mk = |f: &[f64]| {
                let mut probs = f.to_vec();
                probs.push(1.0 - f.iter().sum::<f64>());
                SimplexPoint::new(probs).unwrap()
            };
            let h_up = diffusion_gram(&mk(&up));
            let h_down = diffusion_gram(&mk(&down));
            for i in 0..d {
                div[i] += (h_up[[i, j]] - h_down[[i, j]]) / (2.0 * h);
            }
        }
        div
    }

    #[test]
    fn divergence_k2_closed_values() {
        let d = diffusion_gram_divergence(&point(&[0.5, 0.5]));
        assert!(d[0].abs() < 1e-15);
        // d/dx of x^2 (1-x)^2 at 0.25 is 2 * 0.25 * 0.75 * 0.5
        let d = diffusion_gram_divergence(&point(&[0.25, 0.75]));
        assert!((d[0] - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn divergence_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in [2usize, 3, 5] {
            for _ in 0..40 {
                let x = random_interior(k, &mut rng);
                let closed = diffusion_gram_divergence(&x);
                let fd = divergence_fd(&x, 1e-6);
                for (a, b) in closed.iter().zip(&fd) {
                    let scale = a.abs().max(b.abs()).max(1e-8);
                    assert!((a - b).abs() / scale < 1e-5, "K={k}: closed {a} vs fd {b}");
                }
            }
        }
    }

    #[test]
    fn euler_step_rejects_bad_step_sizes() {
        let ou = OuProcess::new(20.0).unwrap();
        let x = point(&[0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            euler_maruyama_step(&x, &ou, 0.0, 1e-5, &mut rng),
            Err(Error::StepSize(_))
        ));
        assert!(matches!(
            euler_maruyama_step(&x, &ou, -1e-3, 1e-5, &mut rng),
            Err(Error::StepSize(_))
        ));
        assert!(matches!(
            euler_maruyama_step(&x, &ou, 0.02, 1e-5, &mut rng),
            Err(Error::StepSize(_))
        ));
    }

    #[test]
    fn euler_step_shrinks_with_h() {
        let ou = OuProcess::new(20.0).unwrap();
        let x = point(&[0.7, 0.2, 0.1]);
        for (h, bound) in [(1e-4, 0.05), (1e-8, 5e-4), (1e-12, 5e-6)] {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let x1 = euler_maruyama_step(&x, &ou, h, 1e-5, &mut rng).unwrap();
            let max_move = x
                .probs()
                .iter()
                .zip(x1.probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_move < bound, "h={h}: moved {max_move}");
        }
    }

    #[test]
    fn euler_steps_stay_on_the_simplex() {
        let ou = OuProcess::new(20.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = point(&[0.98, 0.01, 0.01]);
        for _ in 0..100_000 {
            x = euler_maruyama_step(&x, &ou, 1e-3, 1e-5, &mut rng).unwrap();
            debug_assert!(x.is_interior(1e-6));
        }
        assert!(x.is_interior(1e-6));
    }

    #[test]
    fn cube_kernel_examples() {
        let ou = OuProcess::new(20.0).unwrap();
        let (mu, _) = cube_kernel_params(&[0.5; 4], 0.1, &ou).unwrap();
        assert!(mu.iter().all(|m| m.abs() < 1e-15));

        // n = 1 reduces to the K=2 simplex kernel
        let k2 = ou.forward_kernel(&point(&[0.8, 0.2]), 0.07).unwrap();
        let (mu, var) = cube_kernel_params(&[0.8], 0.07, &ou).unwrap();
        assert!((mu[0] - k2.mu()[0]).abs() < 1e-15);
        assert!((var - k2.var()).abs() < 1e-18);

        assert!(cube_kernel_params(&[0.5, 1.0], 0.1, &ou).is_err());
        assert!(cube_kernel_params(&[0.0], 0.1, &ou).is_err());
    }

    #[test]
    fn cube_samples_stay_inside() {
        let ou = OuProcess::new(20.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let s = cube_forward_sample(&[0.99, 0.01, 0.5], 0.2, &ou, &mut rng).unwrap();
            assert!(s.iter().all(|&c| c > 0.0 && c < 1.0));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gram_equals_numeric_product_everywhere(
                coords in proptest::collection::vec(-3.0..3.0f64, 1..5)
            ) {
                let x = softmax_transform(&LogitVector::new(coords).unwrap());
                let g = diffusion_matrix(&x);
                let closed = diffusion_gram(&x);
                let numeric = g.dot(&g.t());
                for (a, b) in closed.iter().zip(numeric.iter()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }

            #[test]
            fn euler_step_output_is_interior(
                coords in proptest::collection::vec(-4.0..4.0f64, 1..4),
                h in 1e-6..0.01f64,
                seed in 0u64..1000,
            ) {
                let ou = OuProcess::new(20.0).unwrap();
                let x = softmax_transform(&LogitVector::new(coords).unwrap());
                let x = SimplexPoint::from_free_coords(x.free_coords(), 1e-5).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x1 = euler_maruyama_step(&x, &ou, h, 1e-5, &mut rng).unwrap();
                prop_assert!(x1.is_interior(1e-6));
            }
        }
    }
}
