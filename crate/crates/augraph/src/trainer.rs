//! Gradient-descent minimization of the spectral contrastive loss.
//!
//! Two trainers:
//!
//! - [`train_nonparametric`]: full-batch descent over an explicit N×k
//!   feature table. Realizability is literal here, so a converged table is
//!   a population minimizer up to the stated tolerances.
//! - [`train_minibatch`]: the minibatch scheme over a small parametric
//!   feature map (affine chain + elementwise nonlinearity, optional sphere
//!   projection of radius √μ) evaluated on vertex payloads, with fresh
//!   augmentations drawn from the exact kernel every step.
//!
//! The optimizer is fixed-step gradient descent with step-halving
//! backtracking. No momentum, no adaptivity: every accepted step decreases
//! the loss up to 1e-9 slack, and runs are deterministic per seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::contrastive::{minibatch_loss, population_loss, FeatureTable};
use crate::decimal;
use crate::error::{Error, Result};
use crate::graph::AugmentationGraph;

/// Slack allowed per accepted descent step.
const DESCENT_SLACK: f64 = 1e-9;
/// Backtracking halvings before a step is declared stalled.
const MAX_HALVINGS: u32 = 30;

/// Training mode: exact population gradients or sampled minibatches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    FullPopulation,
    Minibatch { batch_size: usize },
}

/// Shared trainer configuration.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub k: usize,
    pub learning_rate: f64,
    pub max_steps: usize,
    /// Stop when the gradient ∞-norm falls below this.
    pub grad_tolerance: f64,
    /// Gaussian init scale; `None` means `0.1/√k`.
    pub init_scale: Option<f64>,
    pub seed: u64,
    pub mode: TrainMode,
    /// Sphere projection radius² μ for the parametric map (minibatch mode).
    pub sphere_radius_sq: Option<f64>,
}

impl TrainConfig {
    pub fn full_population(k: usize) -> Self {
        Self {
            k,
            learning_rate: 0.2,
            max_steps: 20_000,
            grad_tolerance: 1e-8,
            init_scale: None,
            seed: 0,
            mode: TrainMode::FullPopulation,
            sphere_radius_sq: None,
        }
    }

    pub fn minibatch(k: usize, batch_size: usize) -> Self {
        Self {
            k,
            learning_rate: 0.05,
            max_steps: 3_000,
            grad_tolerance: 0.0,
            init_scale: None,
            seed: 0,
            mode: TrainMode::Minibatch { batch_size },
            sphere_radius_sq: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || self.grad_tolerance < 0.0 || self.k == 0 {
            return Err(Error::InvalidSpec(
                "learning_rate, grad_tolerance, k must be valid".into(),
            ));
        }
        if let Some(s) = self.init_scale {
            if s <= 0.0 {
                return Err(Error::InvalidSpec("init_scale must be positive".into()));
            }
        }
        if let Some(mu) = self.sphere_radius_sq {
            if mu <= 0.0 {
                return Err(Error::InvalidSpec("sphere radius² must be positive".into()));
            }
        }
        if let TrainMode::Minibatch { batch_size } = self.mode {
            if batch_size < 2 {
                return Err(Error::TooFewSamples(batch_size));
            }
        }
        Ok(())
    }

    fn init_scale_value(&self) -> f64 {
        self.init_scale.unwrap_or(0.1 / (self.k as f64).sqrt())
    }
}

/// Exact gradient of the population loss at a feature table:
/// `∂L/∂f(x) = −4·Σ w[x][x']·f(x') + 4·w_x·Σ w_{x'}·(f(x)ᵀf(x'))·f(x')`.
pub fn analytic_gradient(g: &AugmentationGraph, f: &FeatureTable) -> Result<DMatrix<f64>> {
    if f.nrows() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "features have {} rows, graph has {} vertices",
            f.nrows(),
            g.len()
        )));
    }
    let fm = f.as_matrix();
    let gram = fm * fm.transpose();
    let w = g.pair_weights();
    let wx = g.vertex_weights();
    // Attractive term: −4·W·F.
    let mut grad = w * fm;
    grad.scale_mut(-4.0);
    // Repulsive term: 4·Dw·G·Dw·F with Dw = diag(w_x).
    let n = g.len();
    let mut h = gram;
    for j in 0..n {
        h.column_mut(j).scale_mut(wx[j]);
    }
    let mut rep = h * fm;
    for i in 0..n {
        rep.row_mut(i).scale_mut(4.0 * wx[i]);
    }
    grad += rep;
    Ok(grad)
}

/// Full-batch gradient descent on the population loss over an N×k table.
///
/// Gaussian init, fixed step with halving backtracking, stopping on the
/// gradient ∞-norm or the step budget. Returns the table and the accepted
/// loss trace (entry 0 is the initial loss).
pub fn train_nonparametric(
    g: &AugmentationGraph,
    cfg: &TrainConfig,
) -> Result<(FeatureTable, Vec<f64>)> {
    cfg.validate()?;
    let n = g.len();
    if cfg.k > n {
        log::warn!(
            "k = {} exceeds vertex count {}; the extra dimensions are redundant",
            cfg.k,
            n
        );
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let scale = cfg.init_scale_value();
    let mut f = FeatureTable::new(DMatrix::from_fn(n, cfg.k, |_, _| {
        scale * rng.sample::<f64, _>(StandardNormal)
    }))?;

    let mut loss = population_loss(g, &f)?;
    let initial_loss = loss;
    let mut history = vec![loss];

    for step in 0..cfg.max_steps {
        if !loss.is_finite() || loss - initial_loss > 10.0 * (initial_loss.abs() + 1.0) {
            return Err(Error::Divergence { step, loss });
        }
        let grad = analytic_gradient(g, &f)?;
        let grad_inf = grad.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if grad_inf < cfg.grad_tolerance {
            break;
        }
        // Fixed step with halving backtracking; the halved step is local to
        // this iteration.
        let mut lr = cfg.learning_rate;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate = FeatureTable::new(f.as_matrix() - lr * &grad)?;
            let cand_loss = population_loss(g, &candidate)?;
            if cand_loss.is_finite() && cand_loss <= loss + DESCENT_SLACK {
                f = candidate;
                loss = cand_loss;
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            // The gradient no longer yields numeric descent; converged at
            // this resolution.
            break;
        }
        history.push(loss);
    }
    Ok((f, history))
}

// ---------------------------------------------------------------------------
// Parametric feature map
// ---------------------------------------------------------------------------

/// Elementwise nonlinearity between affine layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - x.tanh().powi(2),
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
struct AffineLayer {
    weight: DMatrix<f64>,
    bias: DVector<f64>,
}

/// A small parametric map from vertex payloads to R^k: affine layers with
/// an elementwise nonlinearity after every layer but the last, plus an
/// optional final projection to the sphere of radius √μ.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    layers: Vec<AffineLayer>,
    activation: Activation,
    sphere_radius_sq: Option<f64>,
}

struct ForwardCache {
    /// Layer inputs h_i (h_0 is the payload).
    inputs: Vec<DVector<f64>>,
    /// Pre-activation values a_i per layer.
    pre: Vec<DVector<f64>>,
    /// Output before the sphere projection.
    pre_projection: DVector<f64>,
}

/// Gradient accumulator matching a map's parameters.
pub struct MapGradient {
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

impl FeatureMap {
    /// Build a map with layer dimensions `[d_in, …, k]`, Gaussian-initialized
    /// with per-layer scale `init_scale/√fan_in`, zero biases.
    pub fn new(
        dims: &[usize],
        activation: Activation,
        sphere_radius_sq: Option<f64>,
        init_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidSpec(
                "need at least input and output dims".into(),
            ));
        }
        if let Some(mu) = sphere_radius_sq {
            if mu <= 0.0 {
                return Err(Error::InvalidSpec("sphere radius² must be positive".into()));
            }
        }
        if init_scale <= 0.0 {
            return Err(Error::InvalidSpec("init_scale must be positive".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|wnd| {
                let (fan_in, fan_out) = (wnd[0], wnd[1]);
                let s = init_scale / (fan_in as f64).sqrt();
                AffineLayer {
                    weight: DMatrix::from_fn(fan_out, fan_in, |_, _| {
                        s * rng.sample::<f64, _>(StandardNormal)
                    }),
                    bias: DVector::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self {
            layers,
            activation,
            sphere_radius_sq,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weight.nrows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn sphere_radius_sq(&self) -> Option<f64> {
        self.sphere_radius_sq
    }

    /// Evaluate the map on one payload vector.
    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        self.forward_cached(x).0
    }

    fn forward_cached(&self, x: &DVector<f64>) -> (DVector<f64>, ForwardCache) {
        let m = self.layers.len();
        let mut inputs = Vec::with_capacity(m);
        let mut pre = Vec::with_capacity(m);
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(h.clone());
            let a = &layer.weight * &h + &layer.bias;
            pre.push(a.clone());
            h = if i + 1 < m {
                a.map(|v| self.activation.apply(v))
            } else {
                a
            };
        }
        let pre_projection = h.clone();
        let out = match self.sphere_radius_sq {
            Some(mu) => {
                let norm = h.norm();
                if norm > 0.0 {
                    h * (mu.sqrt() / norm)
                } else {
                    h
                }
            }
            None => h,
        };
        (
            out,
            ForwardCache {
                inputs,
                pre,
                pre_projection,
            },
        )
    }

    fn zero_gradient(&self) -> MapGradient {
        MapGradient {
            weights: self
                .layers
                .iter()
                .map(|l| DMatrix::zeros(l.weight.nrows(), l.weight.ncols()))
                .collect(),
            biases: self
                .layers
                .iter()
                .map(|l| DVector::zeros(l.bias.len()))
                .collect(),
        }
    }

    /// Accumulate parameter gradients for one sample given `∂L/∂z`.
    fn backward(&self, cache: &ForwardCache, dz: &DVector<f64>, acc: &mut MapGradient) {
        let m = self.layers.len();
        // Through the sphere projection: z = √μ·p/‖p‖ ⇒
        // ∂z/∂p = √μ/‖p‖·(I − uuᵀ), u = p/‖p‖.
        let mut delta = match self.sphere_radius_sq {
            Some(mu) => {
                let p = &cache.pre_projection;
                let norm = p.norm();
                if norm > 0.0 {
                    let u = p / norm;
                    (dz - &u * u.dot(dz)) * (mu.sqrt() / norm)
                } else {
                    dz.clone()
                }
            }
            None => dz.clone(),
        };
        for i in (0..m).rev() {
            // The last layer has no activation.
            if i + 1 < m {
                let a = &cache.pre[i];
                delta = DVector::from_fn(delta.len(), |j, _| {
                    delta[j] * self.activation.derivative(a[j])
                });
            }
            acc.weights[i] += &delta * cache.inputs[i].transpose();
            acc.biases[i] += &delta;
            if i > 0 {
                delta = self.layers[i].weight.transpose() * delta;
            }
        }
    }

    fn apply_gradient(&mut self, grad: &MapGradient, lr: f64) {
        for (layer, (dw, db)) in self
            .layers
            .iter_mut()
            .zip(grad.weights.iter().zip(grad.biases.iter()))
        {
            layer.weight -= lr * dw;
            layer.bias -= lr * db;
        }
    }

    /// Evaluate the map on every vertex payload into a feature table.
    pub fn evaluate_table(&self, g: &AugmentationGraph) -> Result<FeatureTable> {
        let payloads = g.payloads().ok_or(Error::MissingPayload)?;
        if payloads.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "payload dim {} vs map input dim {}",
                payloads.ncols(),
                self.input_dim()
            )));
        }
        let mut out = DMatrix::<f64>::zeros(g.len(), self.output_dim());
        for x in 0..g.len() {
            let z = self.forward(&payloads.row(x).transpose());
            out.row_mut(x).copy_from(&z.transpose());
        }
        FeatureTable::new(out)
    }
}

/// Algorithm-1-style minibatch training: sample naturals, draw two
/// augmentations each from the exact kernel, evaluate the map, and take a
/// gradient step on the minibatch loss.
///
/// Sampling is counter-based: the RNG for step `t` is keyed by `(seed, t)`,
/// so runs are reproducible and restartable.
pub fn train_minibatch(
    g: &AugmentationGraph,
    map: &FeatureMap,
    cfg: &TrainConfig,
) -> Result<(FeatureMap, Vec<f64>)> {
    cfg.validate()?;
    let batch_size = match cfg.mode {
        TrainMode::Minibatch { batch_size } => batch_size,
        TrainMode::FullPopulation => {
            return Err(Error::InvalidSpec(
                "train_minibatch needs minibatch mode".into(),
            ))
        }
    };
    let payloads = g.payloads().ok_or(Error::MissingPayload)?;
    if payloads.ncols() != map.input_dim() {
        return Err(Error::ShapeMismatch(format!(
            "payload dim {} vs map input dim {}",
            payloads.ncols(),
            map.input_dim()
        )));
    }
    if map.output_dim() != cfg.k {
        return Err(Error::ShapeMismatch(format!(
            "map output dim {} vs cfg.k = {}",
            map.output_dim(),
            cfg.k
        )));
    }

    let mut map = map.clone();
    let mut history = Vec::with_capacity(cfg.max_steps);
    for step in 0..cfg.max_steps {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(step as u64 + 1);

        let mut batch = Vec::with_capacity(batch_size);
        let mut caches = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let nat = g.sample_natural(&mut rng);
            let x = g.sample_augmentation(nat, &mut rng);
            let xp = g.sample_augmentation(nat, &mut rng);
            let (z, c) = map.forward_cached(&payloads.row(x).transpose());
            let (zp, cp) = map.forward_cached(&payloads.row(xp).transpose());
            batch.push((z, zp));
            caches.push((c, cp));
        }
        let loss = minibatch_loss(&batch)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { step, loss });
        }
        history.push(loss);

        // ∂L/∂z_i = −(2/N)·z_i' + (2/(N(N−1)))·Σ_{j≠i}(z_iᵀz_j')·z_j'
        // ∂L/∂z_i' = −(2/N)·z_i + (2/(N(N−1)))·Σ_{j≠i}(z_jᵀz_i')·z_j
        let nb = batch_size as f64;
        let pair_coeff = 2.0 / (nb * (nb - 1.0));
        let mut grad = map.zero_gradient();
        for i in 0..batch_size {
            let (zi, zip_) = &batch[i];
            let mut dz = -(2.0 / nb) * zip_;
            let mut dzp = -(2.0 / nb) * zi;
            for (j, (zj, zjp)) in batch.iter().enumerate() {
                if j == i {
                    continue;
                }
                dz += pair_coeff * zi.dot(zjp) * zjp;
                dzp += pair_coeff * zj.dot(zip_) * zj;
            }
            map.backward(&caches[i].0, &dz, &mut grad);
            map.backward(&caches[i].1, &dzp, &mut grad);
        }
        map.apply_gradient(&grad, cfg.learning_rate);
    }
    Ok((map, history))
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

/// A trained artifact: either an explicit table or a parametric map.
#[derive(Debug, Clone)]
pub enum Checkpoint {
    Table(FeatureTable),
    Map(FeatureMap),
}

impl Checkpoint {
    /// Features per vertex; a map is evaluated on the graph's payloads.
    pub fn features(&self, g: &AugmentationGraph) -> Result<FeatureTable> {
        match self {
            Checkpoint::Table(t) => {
                if t.nrows() != g.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "checkpoint table has {} rows, graph has {}",
                        t.nrows(),
                        g.len()
                    )));
                }
                Ok(t.clone())
            }
            Checkpoint::Map(m) => m.evaluate_table(g),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    tensors: Vec<NamedTensor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    activation: Option<Activation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere_radius_sq: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    shape: Vec<usize>,
    /// Row-major decimal strings.
    values: Vec<String>,
}

fn tensor_of(name: &str, m: &DMatrix<f64>) -> NamedTensor {
    let mut values = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            values.push(decimal::encode(m[(i, j)]));
        }
    }
    NamedTensor {
        name: name.to_string(),
        shape: vec![m.nrows(), m.ncols()],
        values,
    }
}

fn matrix_of(t: &NamedTensor) -> Result<DMatrix<f64>> {
    if t.shape.len() != 2 || t.shape[0] * t.shape[1] != t.values.len() {
        return Err(Error::MalformedPayload(format!(
            "tensor {} shape mismatch",
            t.name
        )));
    }
    let vals = decimal::decode_vec(&t.values)?;
    Ok(DMatrix::from_row_slice(t.shape[0], t.shape[1], &vals))
}

/// Serialize a checkpoint (flat named tensors, decimal-string entries).
pub fn serialize_checkpoint(cp: &Checkpoint) -> Result<Vec<u8>> {
    let file = match cp {
        Checkpoint::Table(t) => CheckpointFile {
            format: "table".into(),
            tensors: vec![tensor_of("features", t.as_matrix())],
            activation: None,
            sphere_radius_sq: None,
        },
        Checkpoint::Map(m) => {
            let mut tensors = Vec::new();
            for (i, layer) in m.layers.iter().enumerate() {
                tensors.push(tensor_of(&format!("layer{i}.weight"), &layer.weight));
                let b = DMatrix::from_fn(layer.bias.len(), 1, |r, _| layer.bias[r]);
                tensors.push(tensor_of(&format!("layer{i}.bias"), &b));
            }
            CheckpointFile {
                format: "map".into(),
                tensors,
                activation: Some(m.activation),
                sphere_radius_sq: m.sphere_radius_sq.map(decimal::encode),
            }
        }
    };
    Ok(serde_json::to_vec_pretty(&file)?)
}

/// Load a checkpoint written by [`serialize_checkpoint`].
pub fn deserialize_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let file: CheckpointFile = serde_json::from_slice(bytes)
        .map_err(|e| Error::MalformedPayload(format!("checkpoint: {e}")))?;
    match file.format.as_str() {
        "table" => {
            let t = file
                .tensors
                .iter()
                .find(|t| t.name == "features")
                .ok_or_else(|| Error::MalformedPayload("missing features tensor".into()))?;
            Ok(Checkpoint::Table(FeatureTable::new(matrix_of(t)?)?))
        }
        "map" => {
            let mut layers = Vec::new();
            for i in 0.. {
                let w = file
                    .tensors
                    .iter()
                    .find(|t| t.name == format!("layer{i}.weight"));
                let b = file
                    .tensors
                    .iter()
                    .find(|t| t.name == format!("layer{i}.bias"));
                match (w, b) {
                    (Some(w), Some(b)) => {
                        let bias_m = matrix_of(b)?;
                        layers.push(AffineLayer {
                            weight: matrix_of(w)?,
                            bias: DVector::from_fn(bias_m.nrows(), |r, _| bias_m[(r, 0)]),
                        });
                    }
                    (None, None) => break,
                    _ => {
                        return Err(Error::MalformedPayload(format!(
                            "layer {i} has weight xor bias"
                        )))
                    }
                }
            }
            if layers.is_empty() {
                return Err(Error::MalformedPayload(
                    "map checkpoint has no layers".into(),
                ));
            }
            for wnd in layers.windows(2) {
                if wnd[1].weight.ncols() != wnd[0].weight.nrows() {
                    return Err(Error::MalformedPayload("layer dims do not compose".into()));
                }
            }
            let sphere_radius_sq = match &file.sphere_radius_sq {
                Some(s) => Some(decimal::decode(s)?),
                None => None,
            };
            Ok(Checkpoint::Map(FeatureMap {
                layers,
                activation: file.activation.unwrap_or(Activation::Identity),
                sphere_radius_sq,
            }))
        }
        other => Err(Error::MalformedPayload(format!(
            "unknown checkpoint format {other:?}"
        ))),
    }
}
