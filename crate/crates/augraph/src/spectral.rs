//! Eigendecomposition of the normalized adjacency and the low-rank
//! matrix-factorization objective it minimizes.
//!
//! The decomposition fixes a deterministic eigenvector convention so that
//! reports are reproducible: eigenvalues descending, and within each vector
//! the coordinate of largest magnitude (lowest index on ties) is positive.
//! Wherever eigenvalues may repeat, downstream checks compare subspaces via
//! principal angles, never individual vectors.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::NormalizedMatrices;

/// Full symmetric eigendecomposition of `Ā` with the top-`k` block retained.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues of `Ā`, descending.
    gammas: DVector<f64>,
    /// Orthonormal eigenvectors, column i pairs with `gammas[i]`.
    vectors: DMatrix<f64>,
    k: usize,
}

impl SpectralDecomposition {
    /// Eigendecompose `Ā` and retain the top-`k` eigenvectors.
    pub fn compute(m: &NormalizedMatrices, k: usize) -> Result<Self> {
        let n = m.len();
        if k > n {
            return Err(Error::DimensionTooLarge { k, n });
        }
        let eig = nalgebra::SymmetricEigen::try_new(m.adjacency().clone(), 1e-13, 100_000)
            .ok_or(Error::ConvergenceFailure)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let gammas = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
        let mut vectors = DMatrix::<f64>::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(src).clone_owned();
            // Sign convention: the entry of largest magnitude (lowest index
            // on ties) is positive.
            let mut pivot = 0;
            for i in 1..n {
                if v[i].abs() > v[pivot].abs() {
                    pivot = i;
                }
            }
            if v[pivot] < 0.0 {
                v.neg_mut();
            }
            vectors.set_column(col, &v);
        }

        let dec = Self { gammas, vectors, k };
        dec.validate(m)?;
        Ok(dec)
    }

    fn validate(&self, m: &NormalizedMatrices) -> Result<()> {
        let n = self.len();
        if self.gammas[0] > 1.0 + 1e-8 || self.gammas[n - 1] < -1.0 - 1e-8 {
            return Err(Error::ConvergenceFailure);
        }
        let gram = self.vectors.transpose() * &self.vectors;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > 1e-8 {
                    return Err(Error::ConvergenceFailure);
                }
            }
        }
        let image = m.adjacency() * &self.vectors;
        for j in 0..n {
            for i in 0..n {
                if (image[(i, j)] - self.gammas[j] * self.vectors[(i, j)]).abs() > 1e-8 {
                    return Err(Error::ConvergenceFailure);
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.len() == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Eigenvalues `γ_i` of `Ā`, descending.
    pub fn gammas(&self) -> &DVector<f64> {
        &self.gammas
    }

    /// Laplacian eigenvalues `λ_i = 1 − γ_i`, ascending. 1-indexed access
    /// via `lambda(i)`.
    pub fn lambdas(&self) -> DVector<f64> {
        self.gammas.map(|g| 1.0 - g)
    }

    /// `λ_i = 1 − γ_i` for 1-based `i`.
    pub fn lambda(&self, i: usize) -> f64 {
        1.0 - self.gammas[i - 1]
    }

    /// `γ_i` for 1-based `i`.
    pub fn gamma(&self, i: usize) -> f64 {
        self.gammas[i - 1]
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// The i-th eigenvector (0-based column), eigenvalue `gammas[i]`.
    pub fn vector(&self, i: usize) -> nalgebra::DVectorView<'_, f64> {
        self.vectors.column(i)
    }

    /// Top-`k` eigenvector matrix F*.
    pub fn f_star(&self) -> DMatrix<f64> {
        self.vectors.columns(0, self.k).into_owned()
    }

    #[cfg(test)]
    pub(crate) fn from_parts(gammas: DVector<f64>, vectors: DMatrix<f64>, k: usize) -> Self {
        Self { gammas, vectors, k }
    }
}

/// An N×k matrix whose rows are per-vertex embeddings in the
/// matrix-factorization space (row x is `√w_x · f(x)` for a feature map f).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix(DMatrix<f64>);

impl EmbeddingMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.ncols() == 0 {
            return Err(Error::ShapeMismatch("embedding needs k >= 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(
                "embedding has non-finite entries".into(),
            ));
        }
        Ok(Self(m))
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

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

/// The matrix-factorization loss `‖Ā − FFᵀ‖_F²`.
pub fn mf_loss(m: &NormalizedMatrices, f: &EmbeddingMatrix) -> Result<f64> {
    if f.nrows() != m.len() {
        return Err(Error::ShapeMismatch(format!(
            "embedding has {} rows, graph has {} vertices",
            f.nrows(),
            m.len()
        )));
    }
    let residual = m.adjacency() - f.as_matrix() * f.as_matrix().transpose();
    Ok(residual.norm_squared())
}

/// The optimal rank-`k` value `Σ_{i>k} γ_i²`.
pub fn best_rank_k_value(dec: &SpectralDecomposition, k: usize) -> Result<f64> {
    if k > dec.len() {
        return Err(Error::DimensionTooLarge { k, n: dec.len() });
    }
    Ok((k..dec.len()).map(|i| dec.gammas()[i].powi(2)).sum())
}

/// The Eckart–Young minimizer `F̂ = F*·diag(√γ_1..√γ_k)`.
///
/// Eigenvalues in `[-1e-12, 0)` are treated as zero (roundoff); anything
/// more negative cannot be expressed by `FFᵀ` and is reported, not clipped.
pub fn eckart_young_minimizer(dec: &SpectralDecomposition, k: usize) -> Result<EmbeddingMatrix> {
    if k > dec.len() {
        return Err(Error::DimensionTooLarge { k, n: dec.len() });
    }
    let mut f = dec.vectors().columns(0, k).into_owned();
    for i in 0..k {
        let g = dec.gammas()[i];
        if g < -1e-12 {
            return Err(Error::NegativeEigenvalue {
                index: i + 1,
                value: g,
            });
        }
        let scale = g.max(0.0).sqrt();
        f.column_mut(i).scale_mut(scale);
    }
    EmbeddingMatrix::new(f)
}

/// Principal angles (radians, ascending) between the column spans of `a`
/// and `b`. Both are orthonormalized first, so any bases work.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let qa = orthonormal_basis(a)?;
    let qb = orthonormal_basis(b)?;
    let cross = qa.transpose() * qb;
    let svd = cross.svd(false, false);
    let mut angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| s.clamp(-1.0, 1.0).acos())
        .collect();
    angles.sort_by(|x, y| x.total_cmp(y));
    Ok(angles)
}

/// Orthonormal basis for the column span, via thin SVD. Errors if the input
/// is rank-deficient (smallest singular value ≤ 1e-10·largest).
pub fn orthonormal_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = a.ncols();
    let svd = a.clone().svd(true, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin <= 1e-10 * smax {
        return Err(Error::RankDeficient(smin));
    }
    let u = svd.u.expect("requested U");
    Ok(u.columns(0, k).into_owned())
}

/// Orthogonal Procrustes: the orthonormal `Q` minimizing `‖A·Q − B‖_F`,
/// plus the attained residual.
pub fn procrustes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "procrustes shapes {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let m = a.transpose() * b;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let q = u * vt;
    let residual = (a * &q - b).norm();
    Ok((q, residual))
}

/// A Haar-ish random orthonormal k×k matrix (QR of a Gaussian matrix with
/// positive-diagonal R), deterministic given the RNG state.
pub fn random_orthonormal<R: Rng>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..k {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}
