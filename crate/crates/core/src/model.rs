//! A small fully-connected score network with sinusoidal time embedding,
//! exact manual backpropagation, and an Adam optimizer.
//!
//! The network consumes the flattened free coordinates of every site plus a
//! time embedding and predicts, per site, the stabilized reverse-SDE term.
//! Parameters live in one flat `Vec<f64>` (layer weights row-major, then
//! biases), which keeps the optimizer, checkpointing, and finite-difference
//! checks trivial. Everything is 64-bit.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

pub const DEFAULT_EMBED_DIM: usize = 16;
pub const DEFAULT_HIDDEN: [usize; 3] = [128, 128, 128];

/// Sinusoidal time features: `sin(2 pi w_k t)` then `cos(2 pi w_k t)` over
/// `dim/2` geometrically spaced frequencies `w_k` in `[1, 100]`.
pub fn embed_time(t: f64, dim: usize) -> Vec<f64> {
    assert!(dim >= 2 && dim % 2 == 0, "embedding dim must be even and >= 2");
    let half = dim / 2;
    let mut out = vec![0.0; dim];
    for k in 0..half {
        let freq = if half == 1 {
            1.0
        } else {
            100.0f64.powf(k as f64 / (half - 1) as f64)
        };
        let angle = 2.0 * std::f64::consts::PI * freq * t;
        out[k] = angle.sin();
        out[half + k] = angle.cos();
    }
    out
}

/// Immutable shape of a score network. Fixed at initialization; checkpoints
/// carry it so weights are never loaded into the wrong topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    /// Number of simplex sites (e.g. pixels) per state.
    pub sites: usize,
    /// Categories per site, `K`.
    pub categories: usize,
    /// Width of the time embedding appended to the input.
    pub embed_dim: usize,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
}

impl Architecture {
    pub fn with_defaults(sites: usize, categories: usize) -> Self {
        Self {
            sites,
            categories,
            embed_dim: DEFAULT_EMBED_DIM,
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::Domain("architecture needs at least one site".into()));
        }
        if self.categories < 2 {
            return Err(Error::Domain("architecture needs K >= 2".into()));
        }
        if self.embed_dim < 2 || self.embed_dim % 2 != 0 {
            return Err(Error::Domain("embedding dim must be even and >= 2".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Domain("hidden widths must be non-empty and positive".into()));
        }
        Ok(())
    }

    /// Free coordinates per site.
    pub fn free_dim(&self) -> usize {
        self.categories - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sites * self.free_dim() + self.embed_dim
    }

    pub fn output_dim(&self) -> usize {
        self.sites * self.free_dim()
    }

    /// (fan_in, fan_out) of every layer, hidden plus linear head.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut chain = vec![self.input_dim()];
        chain.extend_from_slice(&self.hidden);
        chain.push(self.output_dim());
        chain.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }
}

/// The network: an architecture plus its flat parameter vector.
#[derive(Debug, Clone)]
pub struct ScoreNetwork {
    arch: Architecture,
    params: Vec<f64>,
}

/// Cached activations from a forward pass, consumed by `backward`.
pub struct ForwardCache {
    /// `activations[0]` is the input batch; later entries are post-tanh.
    activations: Vec<Array2<f64>>,
}

impl ScoreNetwork {
    /// Initialize with `N(0, 1/fan_in)` hidden weights and a zero head, so the
    /// initial prediction is identically zero and early reverse dynamics match
    /// the prior process.
    pub fn init<R: Rng + ?Sized>(arch: Architecture, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let dims = arch.layer_dims();
        let n_layers = dims.len();
        let mut params = Vec::with_capacity(arch.param_count());
        for (l, (fan_in, fan_out)) in dims.iter().enumerate() {
            let last = l + 1 == n_layers;
            let sd = (1.0 / *fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(if last { 0.0 } else { sd * rng.sample::<f64, _>(StandardNormal) });
            }
            params.extend(std::iter::repeat(0.0).take(*fan_out));
        }
        Ok(Self { arch, params })
    }

    /// Rebuild from a flat parameter vector (checkpoint restore).
    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::ArchMismatch(format!(
                "parameter vector has {} entries, architecture needs {}",
                params.len(),
                arch.param_count()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("network parameters must be finite".into()));
        }
        Ok(Self { arch, params })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_views(&self) -> Vec<(ArrayView2<'_, f64>, &[f64])> {
        let mut views = Vec::new();
        let mut off = 0;
        for (fan_in, fan_out) in self.arch.layer_dims() {
            let w = ArrayView2::from_shape((fan_in, fan_out), &self.params[off..off + fan_in * fan_out])
                .expect("param layout");
            off += fan_in * fan_out;
            let b = &self.params[off..off + fan_out];
            off += fan_out;
            views.push((w, b));
        }
        views
    }

    /// Batched forward pass: rows are independent inputs.
    pub fn forward_batch(&self, inputs: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_cached(inputs)?.0)
    }

    /// Forward pass that keeps the activations needed for `backward`.
    pub fn forward_cached(&self, inputs: &Array2<f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if inputs.ncols() != self.arch.input_dim() {
            return Err(Error::Shape(format!(
                "input width {} does not match network input {}",
                inputs.ncols(),
                self.arch.input_dim()
            )));
        }
        let views = self.layer_views();
        let n_layers = views.len();
        let mut activations = vec![inputs.clone()];
        let mut h = inputs.clone();
        for (l, (w, b)) in views.iter().enumerate() {
            let mut z = h.dot(w);
            let bias = Array1::from_vec(b.to_vec());
            z += &bias;
            if l + 1 < n_layers {
                z.mapv_inplace(f64::tanh);
                activations.push(z.clone());
            }
            h = z;
        }
        Ok((h, ForwardCache { activations }))
    }

    /// Exact gradients of a batch loss with respect to every parameter, given
    /// the loss gradient at the outputs. Accumulation order is fixed, so
    /// results are reproducible bit-for-bit.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> Vec<f64> {
        let views = self.layer_views();
        let dims = self.arch.layer_dims();
        let n_layers = views.len();
        let mut grads = vec![0.0; self.params.len()];

        // offsets of each layer's weight block
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for (fan_in, fan_out) in &dims {
            offsets.push(off);
            off += fan_in * fan_out + fan_out;
        }

        let mut upstream = grad_out.clone();
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = dims[l];
            // d loss / d pre-activation of layer l
            let gz = if l + 1 == n_layers {
                upstream
            } else {
                let act = &cache.activations[l + 1];
                let mut gz = upstream;
                gz.zip_mut_with(act, |g, a| *g *= 1.0 - a * a);
                gz
            };
            let prev = &cache.activations[l];
            let gw = prev.t().dot(&gz);
            let base = offsets[l];
            grads[base..base + fan_in * fan_out]
                .copy_from_slice(gw.as_standard_layout().as_slice().expect("contiguous"));
            for (j, gb) in grads[base + fan_in * fan_out..base + fan_in * fan_out + fan_out]
                .iter_mut()
                .enumerate()
            {
                *gb = gz.column(j).sum();
            }
            upstream = gz.dot(&views[l].0.t());
        }
        grads
    }

    /// Flatten one state into a network input row: all sites' free
    /// coordinates, then the time embedding.
    pub fn build_input_row(&self, sites: &[SimplexPoint], t: f64) -> Result<Vec<f64>> {
        if sites.len() != self.arch.sites {
            return Err(Error::Shape(format!(
                "state has {} sites, network expects {}",
                sites.len(),
                self.arch.sites
            )));
        }
        let mut row = Vec::with_capacity(self.arch.input_dim());
        for (i, site) in sites.iter().enumerate() {
            if site.k() != self.arch.categories {
                return Err(Error::Shape(format!(
                    "site {i} has K = {}, network expects {}",
                    site.k(),
                    self.arch.categories
                )));
            }
            row.extend_from_slice(site.free_coords());
        }
        row.extend(embed_time(t, self.arch.embed_dim));
        Ok(row)
    }
}

/// First/second moment accumulators for Adam, flat like the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self { m: vec![0.0; param_count], v: vec![0.0; param_count], step: 0 }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.step += 1;
    let t = state.step as f64;
    let c1 = 1.0 - beta1.powf(t);
    let c2 = 1.0 - beta2.powf(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}
