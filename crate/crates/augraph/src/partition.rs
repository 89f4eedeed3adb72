//! Conductance, sparsest m-partitions, extended labelings, Rayleigh
//! quotients, and eigenspace approximation/projection quantities.
//!
//! Two self-loop conventions are exposed everywhere conductance appears.
//! The literal definition keeps `w[x][x]` inside the vertex weight, so a
//! singleton's conductance is below 1; the zero-self-loop convention drops
//! it from the denominator and reproduces the singleton-conductance-1 and
//! `ρ_N = 1` statements. The literal convention is the default.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{AugmentationGraph, NormalizedMatrices};
use crate::spectral::SpectralDecomposition;

/// Hard cap for exact partition enumeration (restricted growth strings).
pub const EXACT_PARTITION_CAP: usize = 14;

/// How self-loops enter conductance denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfLoops {
    /// `w_x` as defined (self-loops included). The literal convention.
    #[default]
    Include,
    /// Denominator `Σ_{x'≠x} w[x][x']`; singleton conductance is exactly 1.
    Exclude,
}

/// A labeling of augmented points by class indices in `1..=r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedLabeling {
    labels: Vec<usize>,
    num_classes: usize,
}

impl ExtendedLabeling {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.iter().any(|&c| c < 1 || c > num_classes) {
            return Err(Error::InvalidSpec(format!(
                "labels must lie in 1..={num_classes}"
            )));
        }
        Ok(Self {
            labels,
            num_classes,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x]
    }
}

/// Dirichlet conductance of a vertex set:
/// boundary weight over internal vertex weight.
///
/// `S = X` is allowed (boundary 0, conductance 0) but flagged in logs since
/// the quantity is degenerate there.
pub fn conductance(g: &AugmentationGraph, s: &[usize], convention: SelfLoops) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = g.len();
    let mut in_s = vec![false; n];
    for &x in s {
        if x >= n {
            return Err(Error::ShapeMismatch(format!("vertex {x} out of range")));
        }
        in_s[x] = true;
    }
    if s.len() == n {
        log::warn!("conductance of the full vertex set is trivially 0");
    }
    let w = g.pair_weights();
    let mut boundary = 0.0;
    let mut volume = 0.0;
    for x in 0..n {
        if !in_s[x] {
            continue;
        }
        volume += match convention {
            SelfLoops::Include => g.vertex_weights()[x],
            SelfLoops::Exclude => g.vertex_weights()[x] - w[(x, x)],
        };
        for xp in 0..n {
            if !in_s[xp] {
                boundary += w[(x, xp)];
            }
        }
    }
    if volume <= 0.0 {
        // Only reachable in the exclude convention when S consists of
        // vertices whose whole weight is self-loops.
        return Err(Error::ZeroDegree(s[0]));
    }
    Ok(boundary / volume)
}

/// Result of a sparsest m-partition search.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    pub m: usize,
    /// The minimizing partition, parts sorted by smallest member.
    pub best_partition: Vec<Vec<usize>>,
    /// min over partitions of max-part conductance.
    pub rho: f64,
    /// Number of complete m-part partitions examined.
    pub enumeration_count: u64,
    /// True when produced by exhaustive enumeration.
    pub exact: bool,
}

struct PartitionSearch<'a> {
    w: &'a DMatrix<f64>,
    wx: &'a DVector<f64>,
    n: usize,
    m: usize,
    convention: SelfLoops,
    labels: Vec<usize>,
    vol: Vec<f64>,
    intra: Vec<f64>,
    selfloops: Vec<f64>,
    best_rho: f64,
    best_labels: Vec<usize>,
    count: u64,
}

impl<'a> PartitionSearch<'a> {
    fn run(mut self) -> (f64, Vec<usize>, u64) {
        self.assign(0, 0);
        (self.best_rho, self.best_labels, self.count)
    }

    /// Restricted growth strings: vertex `i` may take labels
    /// `0..=min(used, m-1)` where `used` is the number of labels already in
    /// play. Prunes branches that can no longer reach exactly `m` parts.
    fn assign(&mut self, i: usize, used: usize) {
        if i == self.n {
            if used == self.m {
                self.count += 1;
                self.evaluate_leaf();
            }
            return;
        }
        // Feasibility: remaining vertices must be able to open the missing
        // parts.
        if used + (self.n - i) < self.m {
            return;
        }
        let limit = (used + 1).min(self.m);
        for label in 0..limit {
            self.push(i, label);
            self.assign(i + 1, used.max(label + 1));
            self.pop(i, label);
        }
    }

    fn push(&mut self, i: usize, label: usize) {
        self.labels[i] = label;
        self.vol[label] += self.wx[i];
        self.selfloops[label] += self.w[(i, i)];
        let mut cross = self.w[(i, i)];
        for j in 0..i {
            if self.labels[j] == label {
                cross += 2.0 * self.w[(i, j)];
            }
        }
        self.intra[label] += cross;
    }

    fn pop(&mut self, i: usize, label: usize) {
        self.vol[label] -= self.wx[i];
        self.selfloops[label] -= self.w[(i, i)];
        let mut cross = self.w[(i, i)];
        for j in 0..i {
            if self.labels[j] == label {
                cross += 2.0 * self.w[(i, j)];
            }
        }
        self.intra[label] -= cross;
        self.labels[i] = usize::MAX;
    }

    fn evaluate_leaf(&mut self) {
        let mut max_phi: f64 = 0.0;
        for p in 0..self.m {
            let denom = match self.convention {
                SelfLoops::Include => self.vol[p],
                SelfLoops::Exclude => self.vol[p] - self.selfloops[p],
            };
            if denom <= 0.0 {
                return; // degenerate part; cannot beat any finite best
            }
            let cut = (self.vol[p] - self.intra[p]).max(0.0);
            max_phi = max_phi.max(cut / denom);
            if max_phi >= self.best_rho {
                return;
            }
        }
        self.best_rho = max_phi;
        self.best_labels = self.labels.clone();
    }
}

/// Exact sparsest m-partition by exhaustive enumeration (N ≤ 14).
pub fn sparsest_m_partition(
    g: &AugmentationGraph,
    m: usize,
    convention: SelfLoops,
) -> Result<PartitionResult> {
    let n = g.len();
    if m < 2 || m > n {
        return Err(Error::InvalidSpec(format!(
            "need 2 <= m <= N, got m={m}, N={n}"
        )));
    }
    if n > EXACT_PARTITION_CAP {
        return Err(Error::TooLargeForExact {
            n,
            cap: EXACT_PARTITION_CAP,
        });
    }
    let search = PartitionSearch {
        w: g.pair_weights(),
        wx: g.vertex_weights(),
        n,
        m,
        convention,
        labels: vec![usize::MAX; n],
        vol: vec![0.0; m],
        intra: vec![0.0; m],
        selfloops: vec![0.0; m],
        best_rho: f64::INFINITY,
        best_labels: Vec::new(),
        count: 0,
    };
    let (rho, labels, count) = search.run();
    if labels.is_empty() {
        return Err(Error::InvalidSpec("no feasible partition".into()));
    }
    Ok(PartitionResult {
        m,
        best_partition: labels_to_parts(&labels, m),
        rho,
        enumeration_count: count,
        exact: true,
    })
}

/// Local-search heuristic for graphs above the exact cap. Clearly labeled
/// non-exact: `exact = false`, no optimality guarantee.
pub fn sparsest_m_partition_heuristic(
    g: &AugmentationGraph,
    m: usize,
    convention: SelfLoops,
    restarts: usize,
    seed: u64,
) -> Result<PartitionResult> {
    use rand::{Rng, SeedableRng};
    let n = g.len();
    if m < 2 || m > n {
        return Err(Error::InvalidSpec(format!(
            "need 2 <= m <= N, got m={m}, N={n}"
        )));
    }
    let mut best_rho = f64::INFINITY;
    let mut best_labels = Vec::new();
    let mut evaluated = 0u64;

    let eval = |labels: &[usize]| -> f64 {
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (x, &p) in labels.iter().enumerate() {
            parts[p].push(x);
        }
        let mut worst: f64 = 0.0;
        for part in &parts {
            if part.is_empty() {
                return f64::INFINITY;
            }
            match conductance(g, part, convention) {
                Ok(phi) => worst = worst.max(phi),
                Err(_) => return f64::INFINITY,
            }
        }
        worst
    };

    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..restarts.max(1) {
        // Random start covering all m parts.
        let mut labels: Vec<usize> = (0..n).map(|i| i % m).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            labels.swap(i, j);
        }
        let mut current = eval(&labels);
        evaluated += 1;
        let mut improved = true;
        while improved {
            improved = false;
            for x in 0..n {
                let orig = labels[x];
                for p in 0..m {
                    if p == orig {
                        continue;
                    }
                    labels[x] = p;
                    let cand = eval(&labels);
                    evaluated += 1;
                    if cand < current - 1e-15 {
                        current = cand;
                        improved = true;
                    } else {
                        labels[x] = orig;
                    }
                }
            }
        }
        if current < best_rho {
            best_rho = current;
            best_labels = labels;
        }
    }
    Ok(PartitionResult {
        m,
        best_partition: labels_to_parts(&best_labels, m),
        rho: best_rho,
        enumeration_count: evaluated,
        exact: false,
    })
}

fn labels_to_parts(labels: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (x, &p) in labels.iter().enumerate() {
        parts[p].push(x);
    }
    parts.sort_by_key(|p| p.first().copied().unwrap_or(usize::MAX));
    parts
}

/// The tightest classifier for label recoverability: the Bayes labeling of
/// each vertex and its error mass
/// `α = Σ_x (Pr[x] − max_c Pr[y=c and x])`.
pub fn bayes_alpha(g: &AugmentationGraph) -> (f64, ExtendedLabeling) {
    let n = g.len();
    let r = g.num_classes();
    let post = g.class_posterior();
    let mut labels = Vec::with_capacity(n);
    let mut alpha = 0.0;
    for x in 0..n {
        let mut best_c = 0;
        for c in 1..r {
            if post[(x, c)] > post[(x, best_c)] {
                best_c = c;
            }
        }
        let row_sum: f64 = (0..r).map(|c| post[(x, c)]).sum();
        alpha += row_sum - post[(x, best_c)];
        labels.push(best_c + 1);
    }
    let labeling = ExtendedLabeling::new(labels, r).expect("valid by construction");
    (alpha, labeling)
}

/// Edge mass crossing labels: `Σ w[x][x']·1[ŷ(x) ≠ ŷ(x')]`.
pub fn phi_hat(g: &AugmentationGraph, yhat: &ExtendedLabeling) -> f64 {
    let n = g.len();
    let w = g.pair_weights();
    let mut total = 0.0;
    for x in 0..n {
        for xp in 0..n {
            if yhat.label(x) != yhat.label(xp) {
                total += w[(x, xp)];
            }
        }
    }
    total
}

/// Disagreement between the extended labeling and the ground truth:
/// `Pr_{x̄, x∼A(·|x̄)}[ŷ(x) ≠ y(x̄)]`, exact over the joint posterior.
pub fn delta_mismatch(g: &AugmentationGraph, yhat: &ExtendedLabeling) -> f64 {
    let n = g.len();
    let r = g.num_classes();
    let post = g.class_posterior();
    let mut total = 0.0;
    for x in 0..n {
        let row_sum: f64 = (0..r).map(|c| post[(x, c)]).sum();
        total += row_sum - post[(x, yhat.label(x) - 1)];
    }
    total
}

/// Per-class quantity `φ_i^ŷ`: edge mass crossing the class-i boundary in
/// either direction, over the class's vertex weight. Counts each crossing
/// pair twice, so it equals 2× the Dirichlet conductance of the class set.
pub fn phi_class(g: &AugmentationGraph, yhat: &ExtendedLabeling, class: usize) -> Result<f64> {
    let s: Vec<usize> = (0..g.len()).filter(|&x| yhat.label(x) == class).collect();
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(2.0 * conductance(g, &s, SelfLoops::Include)?)
}

/// Rayleigh quotient `uᵀLu / uᵀu` of a vector against the normalized
/// Laplacian.
pub fn rayleigh_quotient(m: &NormalizedMatrices, u: &DVector<f64>) -> Result<f64> {
    if u.len() != m.len() {
        return Err(Error::ShapeMismatch(format!(
            "vector length {} vs N = {}",
            u.len(),
            m.len()
        )));
    }
    let denom = u.norm_squared();
    if denom <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((u.transpose() * m.laplacian() * u)[(0, 0)] / denom)
}

/// The equivalent edge form of the Rayleigh quotient for `u(x) = √w_x·f(x)`:
/// `½·Σ w[x][x']·(f(x)−f(x'))² / Σ w_x·f(x)²`.
pub fn rayleigh_quotient_edge_form(g: &AugmentationGraph, f: &DVector<f64>) -> Result<f64> {
    let n = g.len();
    if f.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "function length {} vs N = {}",
            f.len(),
            n
        )));
    }
    let w = g.pair_weights();
    let wx = g.vertex_weights();
    let denom: f64 = (0..n).map(|x| wx[x] * f[x] * f[x]).sum();
    if denom <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut num = 0.0;
    for x in 0..n {
        for xp in 0..n {
            num += w[(x, xp)] * (f[x] - f[xp]).powi(2);
        }
    }
    Ok(0.5 * num / denom)
}

/// The weighted class indicator vector `u_i^ŷ(x) = √w_x·1[ŷ(x)=i]`.
pub fn class_indicator_vector(
    g: &AugmentationGraph,
    yhat: &ExtendedLabeling,
    class: usize,
) -> DVector<f64> {
    DVector::from_fn(g.len(), |x, _| {
        if yhat.label(x) == class {
            g.vertex_weights()[x].sqrt()
        } else {
            0.0
        }
    })
}

/// Best approximation of `u` inside the top-k eigenspace.
///
/// Returns the coefficients `b_i = v_iᵀu` and the squared residual, and
/// asserts the guarantees `residual² ≤ (R(u)/λ_{k+1})·‖u‖²` and `‖b‖ ≤ ‖u‖`.
pub fn approximate_in_span(
    dec: &SpectralDecomposition,
    m: &NormalizedMatrices,
    u: &DVector<f64>,
    k: usize,
) -> Result<(DVector<f64>, f64)> {
    let n = dec.len();
    if k >= n {
        return Err(Error::DimensionTooLarge { k, n });
    }
    if u.norm_squared() <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let lambda_next = dec.lambda(k + 1);
    if lambda_next <= 1e-12 {
        return Err(Error::ZeroSpectralGap(k + 1));
    }
    let b = DVector::from_fn(k, |i, _| dec.vector(i).dot(u));
    let mut residual = u.clone();
    for i in 0..k {
        residual -= b[i] * DVector::from(dec.vector(i));
    }
    let residual_sq = residual.norm_squared();

    let r_u = rayleigh_quotient(m, u)?;
    let bound = r_u / lambda_next * u.norm_squared();
    debug_assert!(
        residual_sq <= bound + 1e-9 * bound.abs().max(1.0),
        "residual bound violated: {residual_sq} > {bound}"
    );
    debug_assert!(b.norm() <= u.norm() + 1e-9);
    Ok((b, residual_sq))
}

/// `‖Π_F^⊥ v_i‖²`: the squared residual of the i-th eigenvector (1-based)
/// projected off the column span of `F`.
pub fn projection_residual(
    f: &crate::spectral::EmbeddingMatrix,
    dec: &SpectralDecomposition,
    i: usize,
) -> Result<f64> {
    if i < 1 || i > f.ncols() {
        return Err(Error::DimensionTooLarge { k: i, n: f.ncols() });
    }
    let basis = crate::spectral::orthonormal_basis(f.as_matrix())?;
    let v = DVector::from(dec.vector(i - 1));
    let coeffs = basis.transpose() * &v;
    let projected = &basis * coeffs;
    Ok((v - projected).norm_squared())
}
