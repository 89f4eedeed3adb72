//! Linear probes on frozen features: prediction, augmentation-ensembled
//! prediction, exact population error accounting, capped quadratic fitting
//! under a Frobenius-norm budget, and the diagonal/right-transform
//! invariance of probe predictions.
//!
//! Ties in every argmax break to the lowest class index. That rule is part
//! of the contract: the transform invariance is asserted at the argmax
//! level, including ties.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::contrastive::FeatureTable;
use crate::error::{Error, Result};
use crate::graph::AugmentationGraph;

/// A k×r linear head, optionally carrying the norm budget it was fitted
/// under (`‖B‖_F ≤ 1/c_lambda`).
#[derive(Debug, Clone)]
pub struct LinearProbe {
    weights: DMatrix<f64>,
    c_lambda: Option<f64>,
}

impl LinearProbe {
    pub fn new(weights: DMatrix<f64>, c_lambda: Option<f64>) -> Result<Self> {
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("probe weights must be finite".into()));
        }
        if let Some(cl) = c_lambda {
            if cl <= 0.0 {
                return Err(Error::InvalidSpec("c_lambda must be positive".into()));
            }
            if weights.norm() > 1.0 / cl + 1e-9 {
                return Err(Error::InvalidSpec(format!(
                    "probe norm {} exceeds budget {}",
                    weights.norm(),
                    1.0 / cl
                )));
            }
        }
        Ok(Self { weights, c_lambda })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn c_lambda(&self) -> Option<f64> {
        self.c_lambda
    }

    pub fn k(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.weights.ncols()
    }
}

/// argmax over logits with ties to the lowest class index; returns 1-based
/// classes.
fn argmax_class(logits: &DVector<f64>) -> usize {
    let mut best = 0;
    for c in 1..logits.len() {
        if logits[c] > logits[best] {
            best = c;
        }
    }
    best + 1
}

/// Logits `f(x)ᵀB` for one vertex.
fn logits(f: &FeatureTable, b: &LinearProbe, x: usize) -> DVector<f64> {
    (f.as_matrix().row(x) * &b.weights).transpose()
}

/// Predicted class for one vertex: `argmax_i (f(x)ᵀB)_i`.
pub fn predict(f: &FeatureTable, b: &LinearProbe, x: usize) -> Result<usize> {
    if f.k() != b.k() {
        return Err(Error::ShapeMismatch(format!(
            "features have k={}, probe has k={}",
            f.k(),
            b.k()
        )));
    }
    Ok(argmax_class(&logits(f, b, x)))
}

/// Ensemble prediction for a natural point: the class most of its
/// augmentation mass predicts, exact over the finite kernel.
pub fn ensemble_predict(
    f: &FeatureTable,
    b: &LinearProbe,
    g: &AugmentationGraph,
    natural_index: usize,
) -> Result<usize> {
    if natural_index >= g.naturals().len() {
        return Err(Error::UnknownNatural(format!("index {natural_index}")));
    }
    let r = b.num_classes();
    let mut mass = vec![0.0f64; r];
    for &(v, p) in g.kernel_row(natural_index) {
        let c = predict(f, b, v)?;
        mass[c - 1] += p;
    }
    let mut best = 0;
    for c in 1..r {
        if mass[c] > mass[best] {
            best = c;
        }
    }
    Ok(best + 1)
}

/// Exact population error accounting for a (features, probe) pair.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ProbeReport {
    /// `Pr_{x̄, x∼A(·|x̄)}[g_{f,B}(x) ≠ y(x̄)]`.
    pub augmented_error: f64,
    /// `Pr_{x̄}[ḡ_{f,B}(x̄) ≠ y(x̄)]` with the ensembled predictor.
    pub ensemble_error: f64,
    /// Population capped quadratic loss of the probe.
    pub capped_loss: f64,
    /// `E‖f(x)‖² = Σ_x w_x‖f(x)‖²`.
    pub feature_sq_norm: f64,
}

/// Capped quadratic loss of one example: `Σ_i min{(Bᵀz − e_y)_i², 1}`.
fn capped_loss_one(logit: &DVector<f64>, class: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..logit.len() {
        let target = if i + 1 == class { 1.0 } else { 0.0 };
        let res = logit[i] - target;
        total += (res * res).min(1.0);
    }
    total
}

/// Exact population probe evaluation by enumeration over `(x̄, x)` pairs
/// weighted by `P(x̄)·A(x|x̄)`.
pub fn probe_error(
    f: &FeatureTable,
    b: &LinearProbe,
    g: &AugmentationGraph,
) -> Result<ProbeReport> {
    if f.nrows() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "features have {} rows, graph has {} vertices",
            f.nrows(),
            g.len()
        )));
    }
    let n = g.len();
    let r = g.num_classes();
    let post = g.class_posterior();

    // Per-vertex prediction and capped losses against each class.
    let mut augmented_error = 0.0;
    let mut capped = 0.0;
    let mut preds = Vec::with_capacity(n);
    for x in 0..n {
        let lg = logits(f, b, x);
        let pred = argmax_class(&lg);
        preds.push(pred);
        for c in 1..=r {
            let mass = post[(x, c - 1)];
            if mass > 0.0 {
                if pred != c {
                    augmented_error += mass;
                }
                capped += mass * capped_loss_one(&lg, c);
            }
        }
    }

    let mut ensemble_error = 0.0;
    for (ni, item) in g.naturals().iter().enumerate() {
        let mut mass = vec![0.0f64; r];
        for &(v, p) in g.kernel_row(ni) {
            mass[preds[v] - 1] += p;
        }
        let mut best = 0;
        for c in 1..r {
            if mass[c] > mass[best] {
                best = c;
            }
        }
        if best + 1 != item.class {
            ensemble_error += item.prob;
        }
    }

    let report = ProbeReport {
        augmented_error,
        ensemble_error,
        capped_loss: capped,
        feature_sq_norm: feature_sq_norm(f, g)?,
    };
    debug_assert!(
        report.ensemble_error <= 2.0 * report.augmented_error + 1e-12,
        "ensembling can at most double the augmented error"
    );
    // A misclassified example has capped loss >= 1/2, for any probe.
    debug_assert!(
        report.augmented_error <= 2.0 * report.capped_loss + 1e-12,
        "capped loss must dominate half the 0-1 error"
    );
    Ok(report)
}

/// `Σ_x w_x ‖f(x)‖²`.
pub fn feature_sq_norm(f: &FeatureTable, g: &AugmentationGraph) -> Result<f64> {
    if f.nrows() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "features have {} rows, graph has {} vertices",
            f.nrows(),
            g.len()
        )));
    }
    Ok((0..g.len())
        .map(|x| g.vertex_weights()[x] * f.as_matrix().row(x).norm_squared())
        .sum())
}

/// What the capped fit optimizes over.
#[derive(Debug, Clone)]
pub enum ProbeFitMode {
    /// The exact population loss (every vertex, posterior-weighted).
    Population,
    /// A labeled sample of `(vertex, class)` pairs.
    Samples(Vec<(usize, usize)>),
}

#[derive(Debug, Clone)]
pub struct ProbeFitConfig {
    pub learning_rate: f64,
    pub max_steps: usize,
    pub mode: ProbeFitMode,
}

impl Default for ProbeFitConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            max_steps: 2_000,
            mode: ProbeFitMode::Population,
        }
    }
}

/// Draw `n` labeled pairs: `x̄ ∼ P`, `x ∼ A(·|x̄)`, label `y(x̄)`.
pub fn sample_labeled(g: &AugmentationGraph, n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let nat = g.sample_natural(&mut rng);
            let x = g.sample_augmentation(nat, &mut rng);
            (x, g.naturals()[nat].class)
        })
        .collect()
}

/// Fit a probe by projected gradient descent on the capped quadratic loss,
/// with exact Euclidean projection onto the Frobenius ball of radius
/// `1/c_lambda`. Returns the best iterate by loss.
pub fn fit_probe_capped(
    f: &FeatureTable,
    g: &AugmentationGraph,
    c_lambda: f64,
    cfg: &ProbeFitConfig,
) -> Result<LinearProbe> {
    if c_lambda <= 0.0 {
        return Err(Error::InvalidSpec("c_lambda must be positive".into()));
    }
    if f.nrows() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "features have {} rows, graph has {} vertices",
            f.nrows(),
            g.len()
        )));
    }
    let k = f.k();
    let r = g.num_classes();
    let radius = 1.0 / c_lambda;
    let post = g.class_posterior();

    // (vertex, class, mass) triples the loss sums over.
    let triples: Vec<(usize, usize, f64)> = match &cfg.mode {
        ProbeFitMode::Population => {
            let mut t = Vec::new();
            for x in 0..g.len() {
                for c in 1..=r {
                    let mass = post[(x, c - 1)];
                    if mass > 0.0 {
                        t.push((x, c, mass));
                    }
                }
            }
            t
        }
        ProbeFitMode::Samples(samples) => {
            let w = 1.0 / samples.len().max(1) as f64;
            samples.iter().map(|&(x, c)| (x, c, w)).collect()
        }
    };
    if triples.is_empty() {
        return Err(Error::TooFewSamples(0));
    }

    let loss_of = |b: &DMatrix<f64>| -> f64 {
        triples
            .iter()
            .map(|&(x, c, mass)| {
                let lg = (f.as_matrix().row(x) * b).transpose();
                mass * capped_loss_one(&lg, c)
            })
            .sum()
    };

    let mut b = DMatrix::<f64>::zeros(k, r);
    let mut best = b.clone();
    let mut best_loss = loss_of(&b);
    for step in 0..cfg.max_steps {
        let mut grad = DMatrix::<f64>::zeros(k, r);
        for &(x, c, mass) in &triples {
            let z = f.as_matrix().row(x).transpose();
            let lg = (f.as_matrix().row(x) * &b).transpose();
            for i in 0..r {
                let target = if i + 1 == c { 1.0 } else { 0.0 };
                let res = lg[i] - target;
                // Closed cap: the boundary keeps its quadratic gradient so
                // the zero init (all residuals on the cap) can move.
                if res * res <= 1.0 {
                    grad.column_mut(i).axpy(2.0 * mass * res, &z, 1.0);
                }
            }
        }
        b -= cfg.learning_rate * grad;
        let norm = b.norm();
        if norm > radius {
            b.scale_mut(radius / norm);
        }
        let loss = loss_of(&b);
        if !loss.is_finite() {
            return Err(Error::Divergence { step, loss });
        }
        if loss < best_loss {
            best_loss = loss;
            best = b.clone();
        }
    }
    LinearProbe::new(best, Some(c_lambda))
}

/// A probe-and-features pair after the invariance transform.
#[derive(Debug, Clone)]
pub struct TransformedProbe {
    pub features: FeatureTable,
    pub probe: LinearProbe,
    /// Condition number of Q (reported; large values degrade exactness).
    pub q_condition: f64,
}

/// Apply `F̃ = D·F·Q`, `B̃ = Q^{-1}·B`. Predictions are preserved at every
/// vertex, tie rule included: the per-vertex logits only get scaled by
/// `d[x] > 0`.
pub fn transform_probe(
    f: &FeatureTable,
    b: &LinearProbe,
    d: &DVector<f64>,
    q: &DMatrix<f64>,
) -> Result<TransformedProbe> {
    if d.len() != f.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "diagonal has {} entries, features have {} rows",
            d.len(),
            f.nrows()
        )));
    }
    if q.nrows() != f.k() || q.ncols() != f.k() {
        return Err(Error::ShapeMismatch("Q must be k×k".into()));
    }
    if d.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidSpec(
            "diagonal must be strictly positive".into(),
        ));
    }
    let svd = q.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::SingularQ(if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        }));
    }
    let cond = smax / smin;

    let mut ft = f.as_matrix() * q;
    for x in 0..ft.nrows() {
        ft.row_mut(x).scale_mut(d[x]);
    }
    let bt = q
        .clone()
        .lu()
        .solve(&b.weights)
        .ok_or(Error::SingularQ(cond))?;
    Ok(TransformedProbe {
        features: FeatureTable::new(ft)?,
        probe: LinearProbe::new(bt, None)?,
        q_condition: cond,
    })
}

/// How an `E(f)` upper bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfMethod {
    CappedFit,
    RandomSearch,
}

/// An upper bound on the linear probe error `E(f)` with the probe that
/// attains it and the method label.
#[derive(Debug)]
pub struct EfEstimate {
    pub probe: LinearProbe,
    pub report: ProbeReport,
    pub method: EfMethod,
}

/// Upper-bound `E(f)` by the capped-quadratic fit; for small heads
/// (k·r ≤ 6) cross-check with a coarse random search over B and keep the
/// better of the two. The exact min over B is NP-hard, so this is a
/// deliberate surrogate and the report says which estimate won.
pub fn estimate_linear_probe_error(
    f: &FeatureTable,
    g: &AugmentationGraph,
    c_lambda: f64,
    cfg: &ProbeFitConfig,
    seed: u64,
) -> Result<EfEstimate> {
    let fitted = fit_probe_capped(f, g, c_lambda, cfg)?;
    let fitted_report = probe_error(f, &fitted, g)?;
    let mut best = EfEstimate {
        probe: fitted,
        report: fitted_report,
        method: EfMethod::CappedFit,
    };

    let k = f.k();
    let r = g.num_classes();
    if k * r <= 6 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let cand = DMatrix::from_fn(k, r, |_, _| rng.sample::<f64, _>(StandardNormal));
            let probe = LinearProbe::new(cand, None)?;
            let report = probe_error(f, &probe, g)?;
            if report.ensemble_error < best.report.ensemble_error {
                best = EfEstimate {
                    probe,
                    report,
                    method: EfMethod::RandomSearch,
                };
            }
        }
    }
    Ok(best)
}
