//! The spectral contrastive loss in its population, empirical, and
//! minibatch forms, plus a SimCLR-style baseline.
//!
//! The population loss over a finite graph is computed exactly by double
//! sums in a fixed order:
//!
//! ```text
//! L(f) = −2·Σ w[x][x']·f(x)ᵀf(x')  +  Σ w_x·w_{x'}·(f(x)ᵀf(x'))²
//! ```
//!
//! Adding the graph constant `‖Ā‖_F²` turns it into the matrix-factorization
//! loss of the embedding with rows `√w_x·f(x)`; that identity is the bridge
//! between training features and eigenvector recovery and is asserted all
//! over the test suite.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::AugmentationGraph;
use crate::spectral::EmbeddingMatrix;

/// Per-vertex features: row x is `f(x) ∈ R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable(DMatrix<f64>);

impl FeatureTable {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("features must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, x: usize) -> nalgebra::RowDVector<f64> {
        self.0.row(x).into_owned()
    }

    /// The embedding with rows `√w_x · f(x)` (the matrix-factorization side
    /// of the loss identity).
    pub fn to_embedding(&self, g: &AugmentationGraph) -> Result<EmbeddingMatrix> {
        check_rows(g, self)?;
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            let s = g.vertex_weights()[i].sqrt();
            m.row_mut(i).scale_mut(s);
        }
        EmbeddingMatrix::new(m)
    }

    /// Inverse of [`FeatureTable::to_embedding`]: rows divided by `√w_x`.
    pub fn from_embedding(g: &AugmentationGraph, f: &EmbeddingMatrix) -> Result<Self> {
        if f.nrows() != g.len() {
            return Err(Error::ShapeMismatch(format!(
                "embedding has {} rows, graph has {} vertices",
                f.nrows(),
                g.len()
            )));
        }
        let mut m = f.as_matrix().clone();
        for i in 0..m.nrows() {
            let s = 1.0 / g.vertex_weights()[i].sqrt();
            m.row_mut(i).scale_mut(s);
        }
        Self::new(m)
    }
}

fn check_rows(g: &AugmentationGraph, f: &FeatureTable) -> Result<()> {
    if f.nrows() != g.len() {
        return Err(Error::ShapeMismatch(format!(
            "features have {} rows, graph has {} vertices",
            f.nrows(),
            g.len()
        )));
    }
    Ok(())
}

/// Exact population spectral contrastive loss.
pub fn population_loss(g: &AugmentationGraph, f: &FeatureTable) -> Result<f64> {
    check_rows(g, f)?;
    let n = g.len();
    let gram = f.as_matrix() * f.as_matrix().transpose();
    let w = g.pair_weights();
    let wx = g.vertex_weights();
    let mut attract = 0.0;
    let mut repel = 0.0;
    for x in 0..n {
        for xp in 0..n {
            let dot = gram[(x, xp)];
            attract += w[(x, xp)] * dot;
            repel += wx[x] * wx[xp] * dot * dot;
        }
    }
    Ok(-2.0 * attract + repel)
}

/// The additive constant between the contrastive and matrix-factorization
/// losses: `Σ w[x][x']² / (w_x w_{x'}) = ‖Ā‖_F²`.
pub fn loss_constant(g: &AugmentationGraph) -> f64 {
    let n = g.len();
    let w = g.pair_weights();
    let wx = g.vertex_weights();
    let mut total = 0.0;
    for x in 0..n {
        for xp in 0..n {
            total += w[(x, xp)] * w[(x, xp)] / (wx[x] * wx[xp]);
        }
    }
    total
}

/// The minimum of the population loss at embedding dimension `k`:
/// `Σ_{i>k} γ_i² − Σ_i γ_i²` (valid when the top-k spectrum is nonnegative).
pub fn population_loss_optimum(
    dec: &crate::spectral::SpectralDecomposition,
    g: &AugmentationGraph,
    k: usize,
) -> Result<f64> {
    Ok(crate::spectral::best_rank_k_value(dec, k)? - loss_constant(g))
}

/// Empirical spectral contrastive loss over a drawn dataset of naturals.
///
/// The inner expectations over each natural's augmentation kernel are
/// computed exactly (no Monte Carlo inside), which keeps the estimator
/// unbiased while removing inner-sampling variance.
pub fn empirical_loss(g: &AugmentationGraph, f: &FeatureTable, samples: &[usize]) -> Result<f64> {
    check_rows(g, f)?;
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let k = f.k();
    // Per-sample kernel means μ_i = E_{x∼A(·|x̄_i)}[f(x)] give the positive
    // term: E[f(x)ᵀf(x⁺)] = ‖μ_i‖² by independence of the two draws.
    let mut mus: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(n);
    for &s in samples {
        let mut mu = nalgebra::DVector::<f64>::zeros(k);
        for &(v, p) in g.kernel_row(s) {
            mu += p * f.as_matrix().row(v).transpose();
        }
        mus.push(mu);
    }
    let positive: f64 = mus.iter().map(|mu| mu.norm_squared()).sum::<f64>() / n as f64;

    let mut negative = 0.0;
    for (i, &si) in samples.iter().enumerate() {
        for (j, &sj) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut expect = 0.0;
            for &(vi, pi) in g.kernel_row(si) {
                for &(vj, pj) in g.kernel_row(sj) {
                    let dot = f.as_matrix().row(vi).dot(&f.as_matrix().row(vj));
                    expect += pi * pj * dot * dot;
                }
            }
            negative += expect;
        }
    }
    negative /= (n * (n - 1)) as f64;

    Ok(-2.0 * positive + negative)
}

/// Draw `n` i.i.d. natural indices from `P` (inverse CDF, seeded).
pub fn sample_naturals(g: &AugmentationGraph, n: usize, seed: u64) -> Vec<usize> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| g.sample_natural(&mut rng)).collect()
}

/// The minibatch loss of Algorithm-1-style training:
/// `−(2/N)·Σ z_iᵀz_i' + (1/(N(N−1)))·Σ_{i≠j} (z_iᵀz_j')²`.
pub fn minibatch_loss(batch: &[(nalgebra::DVector<f64>, nalgebra::DVector<f64>)]) -> Result<f64> {
    let n = batch.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mut positive = 0.0;
    for (z, zp) in batch {
        positive += z.dot(zp);
    }
    let mut negative = 0.0;
    for (i, (zi, _)) in batch.iter().enumerate() {
        for (j, (_, zjp)) in batch.iter().enumerate() {
            if i != j {
                let d = zi.dot(zjp);
                negative += d * d;
            }
        }
    }
    Ok(-2.0 / n as f64 * positive + negative / (n * (n - 1)) as f64)
}

/// SimCLR-style baseline: mean over anchors of
/// `−s⁺ + log(exp(s⁺) + Σ_j exp(s_j))`, negatives being the other anchors'
/// partners. Matches the rewritten form with no temperature by default.
pub fn simclr_loss(
    batch: &[(nalgebra::DVector<f64>, nalgebra::DVector<f64>)],
    temperature: f64,
) -> Result<f64> {
    let n = batch.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if temperature <= 0.0 {
        return Err(Error::InvalidSpec("temperature must be positive".into()));
    }
    let mut total = 0.0;
    for (i, (zi, zip_)) in batch.iter().enumerate() {
        let s_pos = zi.dot(zip_) / temperature;
        let mut sims = vec![s_pos];
        for (j, (_, zjp)) in batch.iter().enumerate() {
            if j != i {
                sims.push(zi.dot(zjp) / temperature);
            }
        }
        // log-sum-exp with max subtraction.
        let m = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + sims.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
        total += -s_pos + lse;
    }
    Ok(total / n as f64)
}
