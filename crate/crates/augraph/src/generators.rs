//! Reproducible synthetic graph families.
//!
//! Three generators cover the regimes the theory cares about:
//!
//! - [`gen_blocks`]: classes split into sub-class blocks with controllable
//!   cross-block / cross-class leakage (nearly disconnected graphs),
//! - [`gen_manifold`]: a discretized mixture-of-manifolds instance where
//!   naturals are sampled through a generator map and augmentation is
//!   isotropic Gaussian noise, discretized onto sampled atoms with
//!   self-normalized density weights,
//! - [`gen_random`]: fuzzing graphs with random stochastic kernel rows.
//!
//! Identical spec + seed always yields the identical graph.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AugmentationGraph, AugmentationKernel, NaturalDistribution};

/// Block-structured graphs: `classes × blocks_per_class` vertex pools with
/// uniform within-block kernels and controllable leak masses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSpec {
    pub classes: usize,
    pub blocks_per_class: usize,
    pub naturals_per_block: usize,
    pub augmentations_per_natural: usize,
    /// Fraction of each kernel row leaking to a sibling block (same class).
    pub cross_block_mass: f64,
    /// Fraction of each kernel row leaking to a block of another class.
    pub cross_class_mass: f64,
    pub seed: u64,
}

impl BlockSpec {
    fn validate(&self) -> Result<()> {
        if self.classes < 1
            || self.blocks_per_class < 1
            || self.naturals_per_block < 1
            || self.augmentations_per_natural < 1
        {
            return Err(Error::InvalidSpec("block counts must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.cross_block_mass)
            || !(0.0..1.0).contains(&self.cross_class_mass)
            || self.cross_block_mass + self.cross_class_mass >= 1.0
        {
            return Err(Error::InvalidSpec(
                "leak masses must lie in [0,1) and sum below 1".into(),
            ));
        }
        Ok(())
    }
}

/// Build a block graph. Vertices carry one-hot block payloads so the
/// parametric trainer can run on them.
pub fn gen_blocks(spec: &BlockSpec) -> Result<AugmentationGraph> {
    spec.validate()?;
    let r = spec.classes;
    let b = spec.blocks_per_class;
    let pool = spec.naturals_per_block * spec.augmentations_per_natural;
    let total_blocks = r * b;
    let n_naturals = total_blocks * spec.naturals_per_block;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    let block_id = |c: usize, j: usize| c * b + j;
    let vertex_name = |blk: usize, t: usize| format!("b{blk}v{t}");

    let mut items = Vec::with_capacity(n_naturals);
    let mut rows = Vec::with_capacity(n_naturals);
    for c in 0..r {
        for j in 0..b {
            let own = block_id(c, j);
            for s in 0..spec.naturals_per_block {
                let nat = format!("n{own}s{s}");
                items.push((nat.clone(), 1.0 / n_naturals as f64, c + 1));

                let mut cb = spec.cross_block_mass;
                let mut cc = spec.cross_class_mass;
                let sibling = if b > 1 {
                    let mut t = rng.gen_range(0..b - 1);
                    if t >= j {
                        t += 1;
                    }
                    Some(block_id(c, t))
                } else {
                    cb = 0.0;
                    None
                };
                let foreign = if r > 1 {
                    let mut oc = rng.gen_range(0..r - 1);
                    if oc >= c {
                        oc += 1;
                    }
                    Some(block_id(oc, rng.gen_range(0..b)))
                } else {
                    cc = 0.0;
                    None
                };

                let mut entries = Vec::with_capacity(3 * pool);
                let own_mass = 1.0 - cb - cc;
                for t in 0..pool {
                    entries.push((vertex_name(own, t), own_mass / pool as f64));
                }
                if let Some(sib) = sibling {
                    for t in 0..pool {
                        entries.push((vertex_name(sib, t), cb / pool as f64));
                    }
                }
                if let Some(fo) = foreign {
                    for t in 0..pool {
                        entries.push((vertex_name(fo, t), cc / pool as f64));
                    }
                }
                rows.push((nat, entries));
            }
        }
    }

    let dist = NaturalDistribution::new(items, r)?;
    let kernel = AugmentationKernel::new(rows)?;
    let mut g = AugmentationGraph::build(&dist, &kernel)?;

    // One-hot block payloads (dimension = total blocks).
    let mut payloads = DMatrix::<f64>::zeros(g.len(), total_blocks);
    for (i, id) in g.vertex_ids().to_vec().iter().enumerate() {
        let blk: usize = id[1..id.find('v').unwrap()].parse().unwrap();
        payloads[(i, blk)] = 1.0;
    }
    g.set_payloads(payloads)?;
    Ok(g)
}

/// Which latent-to-ambient generator a manifold spec uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMap {
    /// Embed latent coordinates into the first `latent_dim` ambient axes.
    Identity,
    /// A fixed seeded smooth map `x = P z + W2 tanh(W1 z)`; the bi-Lipschitz
    /// constant is estimated empirically, not verified.
    RandomSmooth,
}

/// Discretized mixture-of-manifolds graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub classes: usize,
    pub ambient_dim: usize,
    pub latent_dim: usize,
    /// Component means in latent space, one per class.
    pub means: Vec<Vec<f64>>,
    /// Augmentation noise scale σ; per-coordinate std is σ/√d.
    pub sigma: f64,
    pub generator: GeneratorMap,
    pub n_naturals: usize,
    pub atoms_per_natural: usize,
    pub seed: u64,
}

impl Default for ManifoldSpec {
    /// The reference instance: r=2, d=8, d'=2, σ=0.1, 40 naturals,
    /// 4 atoms each, seed 7, axis-aligned means.
    fn default() -> Self {
        Self {
            classes: 2,
            ambient_dim: 8,
            latent_dim: 2,
            means: vec![vec![2.0, 0.0], vec![0.0, 2.0]],
            sigma: 0.1,
            generator: GeneratorMap::Identity,
            n_naturals: 40,
            atoms_per_natural: 4,
            seed: 7,
        }
    }
}

impl ManifoldSpec {
    fn validate(&self) -> Result<()> {
        if self.classes < 1 || self.classes > self.ambient_dim {
            return Err(Error::InvalidSpec(
                "need 1 <= classes <= ambient_dim".into(),
            ));
        }
        if self.latent_dim > self.ambient_dim || self.latent_dim == 0 {
            return Err(Error::InvalidSpec(
                "need 1 <= latent_dim <= ambient_dim".into(),
            ));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidSpec("sigma must be positive".into()));
        }
        if self.means.len() != self.classes || self.means.iter().any(|m| m.len() != self.latent_dim)
        {
            return Err(Error::InvalidSpec(
                "means must be classes × latent_dim".into(),
            ));
        }
        if self.n_naturals < 2 || self.atoms_per_natural < 1 {
            return Err(Error::InvalidSpec(
                "need >= 2 naturals and >= 1 atom".into(),
            ));
        }
        Ok(())
    }
}

/// Measured facts about a generated manifold instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldInfo {
    /// Naturals whose generating component disagrees with the
    /// argmax-density rule (the generating index is the ground truth).
    pub label_divergences: usize,
    pub min_mean_distance: f64,
    /// Empirical bi-Lipschitz estimate of the generator map (1 for identity).
    pub kappa_estimate: f64,
}

struct SmoothMap {
    p: DMatrix<f64>,
    w1: DMatrix<f64>,
    w2: DMatrix<f64>,
}

impl SmoothMap {
    fn new(d: usize, d_latent: usize, rng: &mut ChaCha12Rng) -> Self {
        let h = 2 * d;
        let p = DMatrix::from_fn(d, d_latent, |i, j| if i == j { 1.0 } else { 0.0 });
        let w1 = DMatrix::from_fn(h, d_latent, |_, _| {
            rng.sample::<f64, _>(StandardNormal) / (d_latent as f64).sqrt()
        });
        let w2 = DMatrix::from_fn(d, h, |_, _| {
            rng.sample::<f64, _>(StandardNormal) * 0.5 / (h as f64).sqrt()
        });
        Self { p, w1, w2 }
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.p * z + &self.w2 * (&self.w1 * z).map(f64::tanh)
    }
}

/// Sample a manifold instance and discretize it into an exact finite graph.
///
/// Atoms (sampled augmentations) become the vertex set; each natural's
/// kernel row is the Gaussian noise density evaluated at every atom,
/// self-normalized. Vertex payloads are the atom coordinates.
pub fn gen_manifold(spec: &ManifoldSpec) -> Result<(AugmentationGraph, ManifoldInfo)> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let d = spec.ambient_dim;
    let dl = spec.latent_dim;
    let latent_std = 1.0 / (dl as f64).sqrt();
    let noise_std = spec.sigma / (d as f64).sqrt();

    let smooth = match spec.generator {
        GeneratorMap::Identity => None,
        GeneratorMap::RandomSmooth => Some(SmoothMap::new(d, dl, &mut rng)),
    };
    let apply = |z: &DVector<f64>, smooth: &Option<SmoothMap>| -> DVector<f64> {
        match smooth {
            None => DVector::from_fn(d, |i, _| if i < dl { z[i] } else { 0.0 }),
            Some(m) => m.apply(z),
        }
    };

    let mut min_mean_distance = f64::INFINITY;
    for i in 0..spec.classes {
        for j in (i + 1)..spec.classes {
            let di: f64 = spec.means[i]
                .iter()
                .zip(&spec.means[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum();
            min_mean_distance = min_mean_distance.min(di.sqrt());
        }
    }
    if spec.classes == 1 {
        min_mean_distance = 0.0;
    }

    // Naturals: latent sample through the generator, label = generating index.
    let mut latents = Vec::with_capacity(spec.n_naturals);
    let mut ambients = Vec::with_capacity(spec.n_naturals);
    let mut classes = Vec::with_capacity(spec.n_naturals);
    for _ in 0..spec.n_naturals {
        let c = rng.gen_range(0..spec.classes);
        let z = DVector::from_fn(dl, |i, _| {
            spec.means[c][i] + latent_std * rng.sample::<f64, _>(StandardNormal)
        });
        ambients.push(apply(&z, &smooth));
        latents.push(z);
        classes.push(c);
    }
    // Ensure every declared class actually appears.
    for c in 0..spec.classes {
        if !classes.contains(&c) {
            classes[c % spec.n_naturals] = c;
            let z = DVector::from_fn(dl, |i, _| {
                spec.means[c][i] + latent_std * rng.sample::<f64, _>(StandardNormal)
            });
            ambients[c % spec.n_naturals] = apply(&z, &smooth);
            latents[c % spec.n_naturals] = z;
        }
    }

    let label_divergences = latents
        .iter()
        .zip(&classes)
        .filter(|(z, &c)| {
            let best = (0..spec.classes)
                .min_by(|&a, &b| {
                    let da: f64 = (0..dl).map(|i| (z[i] - spec.means[a][i]).powi(2)).sum();
                    let db: f64 = (0..dl).map(|i| (z[i] - spec.means[b][i]).powi(2)).sum();
                    da.total_cmp(&db)
                })
                .unwrap();
            best != c
        })
        .count();

    // Atoms: sampled augmentations; they are the vertex set.
    let n_atoms = spec.n_naturals * spec.atoms_per_natural;
    let mut atoms = Vec::with_capacity(n_atoms);
    for amb in &ambients {
        for _ in 0..spec.atoms_per_natural {
            let atom = DVector::from_fn(d, |i, _| {
                amb[i] + noise_std * rng.sample::<f64, _>(StandardNormal)
            });
            atoms.push(atom);
        }
    }

    // Kernel rows: self-normalized noise density at every atom.
    let mut rows = Vec::with_capacity(spec.n_naturals);
    let inv_two_var = 1.0 / (2.0 * noise_std * noise_std);
    for (j, amb) in ambients.iter().enumerate() {
        let exponents: Vec<f64> = atoms
            .iter()
            .map(|atom| -(atom - amb).norm_squared() * inv_two_var)
            .collect();
        let emax = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = exponents.iter().map(|e| (e - emax).exp()).collect();
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::DegenerateDiscretization(format!(
                "natural {j} places no mass on any atom"
            )));
        }
        let mut entries: Vec<(String, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(e, &w)| (format!("atom{e}"), w / total))
            .collect();
        // Put the rounding residual on the largest entry so nothing can go
        // negative.
        let s: f64 = entries.iter().map(|(_, p)| p).sum();
        let argmax = entries
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .unwrap();
        entries[argmax].1 += 1.0 - s;
        rows.push((format!("nat{j}"), entries));
    }

    // Every atom must receive mass from some natural.
    let mut claimed = vec![false; n_atoms];
    for (_, entries) in &rows {
        for (id, p) in entries {
            if *p > 0.0 {
                let e: usize = id[4..].parse().unwrap();
                claimed[e] = true;
            }
        }
    }
    if let Some(e) = claimed.iter().position(|&c| !c) {
        return Err(Error::DegenerateDiscretization(format!(
            "atom {e} claimed by no natural"
        )));
    }

    let items: Vec<(String, f64, usize)> = (0..spec.n_naturals)
        .map(|j| {
            (
                format!("nat{j}"),
                1.0 / spec.n_naturals as f64,
                classes[j] + 1,
            )
        })
        .collect();
    let dist = NaturalDistribution::new(items, spec.classes)?;
    let kernel = AugmentationKernel::new(rows)?;
    let mut g = AugmentationGraph::build(&dist, &kernel)?;

    // Payloads: atom coordinates, restricted to surviving vertices.
    let mut payloads = DMatrix::<f64>::zeros(g.len(), d);
    for (i, id) in g.vertex_ids().to_vec().iter().enumerate() {
        let e: usize = id[4..].parse().unwrap();
        for c in 0..d {
            payloads[(i, c)] = atoms[e][c];
        }
    }
    g.set_payloads(payloads)?;

    let kappa_estimate = match &smooth {
        None => 1.0,
        Some(m) => {
            let mut kappa: f64 = 1.0;
            for _ in 0..256 {
                let z1 = DVector::from_fn(dl, |_, _| rng.sample::<f64, _>(StandardNormal));
                let z2 = DVector::from_fn(dl, |_, _| rng.sample::<f64, _>(StandardNormal));
                let dz = (&z1 - &z2).norm();
                if dz < 1e-9 {
                    continue;
                }
                let dx = (m.apply(&z1) - m.apply(&z2)).norm();
                let ratio = dx / dz;
                kappa = kappa.max(ratio).max(1.0 / ratio);
            }
            kappa
        }
    };

    Ok((
        g,
        ManifoldInfo {
            label_divergences,
            min_mean_distance,
            kappa_estimate,
        },
    ))
}

/// Random stochastic graphs for property fuzzing. Every vertex is covered,
/// all probabilities are positive, and the result is deterministic per seed.
pub fn gen_random(
    n_naturals: usize,
    n_vertices: usize,
    r: usize,
    seed: u64,
) -> Result<AugmentationGraph> {
    if n_vertices < 2 {
        return Err(Error::InvalidSpec("need at least 2 vertices".into()));
    }
    if n_naturals < r.max(1) {
        return Err(Error::InvalidSpec(
            "need at least one natural per class".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut probs: Vec<f64> = (0..n_naturals).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let s: f64 = probs.iter().sum();
    probs[0] += 1.0 - s;

    // Random supports; then cover any orphaned vertex.
    let mut supports: Vec<Vec<usize>> = (0..n_naturals)
        .map(|_| {
            let size = rng.gen_range(2..=n_vertices.min(6));
            rand::seq::index::sample(&mut rng, n_vertices, size).into_vec()
        })
        .collect();
    let mut covered = vec![false; n_vertices];
    for sup in &supports {
        for &v in sup {
            covered[v] = true;
        }
    }
    for (v, &covered) in covered.iter().enumerate() {
        if !covered {
            let j = rng.gen_range(0..n_naturals);
            supports[j].push(v);
        }
    }
    for sup in &mut supports {
        sup.sort_unstable();
        sup.dedup();
    }

    let items: Vec<(String, f64, usize)> = (0..n_naturals)
        .map(|i| (format!("n{i}"), probs[i], 1 + (i % r)))
        .collect();
    let rows: Vec<(String, Vec<(String, f64)>)> = supports
        .iter()
        .enumerate()
        .map(|(i, sup)| {
            let mut ps: Vec<f64> = sup.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = ps.iter().sum();
            ps.iter_mut().for_each(|p| *p /= t);
            let s: f64 = ps.iter().sum();
            ps[0] += 1.0 - s;
            (
                format!("n{i}"),
                sup.iter()
                    .zip(&ps)
                    .map(|(&v, &p)| (format!("x{v}"), p))
                    .collect(),
            )
        })
        .collect();

    let dist = NaturalDistribution::new(items, r)?;
    let kernel = AugmentationKernel::new(rows)?;
    AugmentationGraph::build(&dist, &kernel)
}

/// A generator spec file: one of the three families, tagged.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Blocks(BlockSpec),
    Manifold(ManifoldSpec),
    Random {
        n_naturals: usize,
        n_vertices: usize,
        classes: usize,
        seed: u64,
    },
}

impl GeneratorSpec {
    /// Run the described generator.
    pub fn generate(&self) -> Result<AugmentationGraph> {
        match self {
            GeneratorSpec::Blocks(spec) => gen_blocks(spec),
            GeneratorSpec::Manifold(spec) => Ok(gen_manifold(spec)?.0),
            GeneratorSpec::Random {
                n_naturals,
                n_vertices,
                classes,
                seed,
            } => gen_random(*n_naturals, *n_vertices, *classes, *seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralDecomposition;
    use approx::assert_abs_diff_eq;

    fn simple_blocks(cb: f64, cc: f64, seed: u64) -> BlockSpec {
        BlockSpec {
            classes: 2,
            blocks_per_class: 2,
            naturals_per_block: 1,
            augmentations_per_natural: 2,
            cross_block_mass: cb,
            cross_class_mass: cc,
            seed,
        }
    }

    #[test]
    fn zero_leak_blocks_are_disconnected_components() {
        let g = gen_blocks(&simple_blocks(0.0, 0.0, 1)).unwrap();
        assert_eq!(g.len(), 8);
        let dec = SpectralDecomposition::compute(&g.normalized_matrices(), 4).unwrap();
        // classes × blocks = 4 connected components = 4 unit eigenvalues.
        let ones = dec
            .gammas()
            .iter()
            .filter(|&&g| (g - 1.0).abs() < 1e-9)
            .count();
        assert_eq!(ones, 4);
        let zeros = dec.gammas().iter().filter(|&&g| g.abs() < 1e-9).count();
        assert_eq!(zeros, 4);
    }

    #[test]
    fn cross_class_mass_bounds_alpha() {
        let g = gen_blocks(&simple_blocks(0.05, 0.01, 3)).unwrap();
        let (alpha, _) = crate::partition::bayes_alpha(&g);
        assert!(alpha <= 0.01 + 1e-9, "alpha = {alpha}");
    }

    /// Sub-class structure: classes stay perfectly separated (ρ₂ = 0),
    /// splitting along blocks is cheap (ρ₄ small), and any 5th part must
    /// break a block (ρ₅ order 1).
    #[test]
    fn sub_class_blocks_partition_profile() {
        use crate::partition::{sparsest_m_partition, SelfLoops};
        let g = gen_blocks(&simple_blocks(0.05, 0.0, 7)).unwrap();
        let rho2 = sparsest_m_partition(&g, 2, SelfLoops::Include).unwrap().rho;
        let rho4 = sparsest_m_partition(&g, 4, SelfLoops::Include).unwrap().rho;
        let rho5 = sparsest_m_partition(&g, 5, SelfLoops::Include).unwrap().rho;
        assert!(rho2 < 1e-12, "rho2 = {rho2}");
        assert!(rho4 < 0.2, "rho4 = {rho4}");
        assert!(rho5 > 0.3, "rho5 = {rho5}");
        assert!(rho4 < rho5);
    }

    #[test]
    fn blocks_deterministic_per_seed() {
        let a = gen_blocks(&simple_blocks(0.1, 0.02, 9)).unwrap();
        let b = gen_blocks(&simple_blocks(0.1, 0.02, 9)).unwrap();
        assert_eq!(a.pair_weights(), b.pair_weights());
        assert_eq!(a.payloads().unwrap(), b.payloads().unwrap());
    }

    #[test]
    fn manifold_default_is_valid_and_deterministic() {
        let spec = ManifoldSpec::default();
        let (g1, info1) = gen_manifold(&spec).unwrap();
        let (g2, _) = gen_manifold(&spec).unwrap();
        assert_eq!(g1.pair_weights(), g2.pair_weights());
        assert_abs_diff_eq!(g1.total_weight(), 1.0, epsilon = 1e-10);
        assert!(info1.min_mean_distance > 0.0);
        assert_abs_diff_eq!(info1.kappa_estimate, 1.0, epsilon = 0.0);
        assert!(g1.payloads().is_some());
    }

    #[test]
    fn manifold_sigma_to_zero_limit_disconnects() {
        let spec = ManifoldSpec {
            sigma: 0.01,
            n_naturals: 10,
            atoms_per_natural: 2,
            ..Default::default()
        };
        let (g, _) = gen_manifold(&spec).unwrap();
        let (alpha, _) = crate::partition::bayes_alpha(&g);
        assert!(alpha < 1e-6, "alpha = {alpha}");
    }

    #[test]
    fn manifold_smooth_map_reports_kappa() {
        let spec = ManifoldSpec {
            generator: GeneratorMap::RandomSmooth,
            n_naturals: 8,
            atoms_per_natural: 2,
            ..Default::default()
        };
        let (_, info) = gen_manifold(&spec).unwrap();
        assert!(info.kappa_estimate >= 1.0);
    }

    #[test]
    fn random_graphs_pass_invariants_for_100_seeds() {
        for seed in 0..100 {
            let g = gen_random(5, 12, 2, seed).unwrap();
            assert_eq!(g.len(), 12);
            assert_abs_diff_eq!(g.total_weight(), 1.0, epsilon = 1e-10);
            for i in 0..g.len() {
                assert!(g.vertex_weights()[i] > 0.0);
                let row_sum = g.pair_weights().row(i).sum();
                assert_abs_diff_eq!(row_sum, g.vertex_weights()[i], epsilon = 1e-12);
                for j in 0..g.len() {
                    assert_eq!(g.pair_weights()[(i, j)], g.pair_weights()[(j, i)]);
                }
            }
        }
    }

    #[test]
    fn random_graph_deterministic_per_seed() {
        let a = gen_random(4, 9, 3, 42).unwrap();
        let b = gen_random(4, 9, 3, 42).unwrap();
        assert_eq!(a.pair_weights(), b.pair_weights());
        let bytes_a = crate::graph::serialize_graph(&a).unwrap();
        let bytes_b = crate::graph::serialize_graph(&b).unwrap();
        assert_eq!(bytes_a, bytes_b);
    }

    #[test]
    fn spec_file_round_trip() {
        let spec = GeneratorSpec::Blocks(simple_blocks(0.1, 0.01, 5));
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&text).unwrap();
        let g1 = spec.generate().unwrap();
        let g2 = back.generate().unwrap();
        assert_eq!(g1.pair_weights(), g2.pair_weights());
    }
}
