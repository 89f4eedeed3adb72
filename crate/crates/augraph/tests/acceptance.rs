//! Acceptance suite: every gate this library is expected to clear, one
//! pass/fail line per criterion.
//!
//! Criteria 1-10 are hard gates with pinned tolerances. Criterion 11
//! reports qualitative trends without gating. Run with `--nocapture` to
//! see the per-criterion lines.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use augraph::bounds::{bound_3_7_shape, bound_b2, bound_d2};
use augraph::contrastive::{
    empirical_loss, loss_constant, population_loss, population_loss_optimum, sample_naturals,
    FeatureTable,
};
use augraph::generators::{self, BlockSpec, ManifoldSpec};
use augraph::graph::AugmentationGraph;
use augraph::partition::{
    approximate_in_span, bayes_alpha, class_indicator_vector, conductance, delta_mismatch,
    phi_class, phi_hat, rayleigh_quotient, sparsest_m_partition, SelfLoops,
};
use augraph::probe::{
    feature_sq_norm, fit_probe_capped, predict, probe_error, sample_labeled, transform_probe,
    LinearProbe, ProbeFitConfig, ProbeFitMode,
};
use augraph::spectral::{principal_angles, random_orthonormal, SpectralDecomposition};
use augraph::trainer::{analytic_gradient, train_nonparametric, TrainConfig};

fn g0() -> AugmentationGraph {
    let dist = augraph::graph::NaturalDistribution::new(
        vec![("a".into(), 0.5, 1), ("b".into(), 0.5, 2)],
        2,
    )
    .unwrap();
    let kernel = augraph::graph::AugmentationKernel::new(vec![
        ("a".into(), vec![("x1".into(), 0.5), ("x2".into(), 0.5)]),
        ("b".into(), vec![("x3".into(), 0.5), ("x4".into(), 0.5)]),
    ])
    .unwrap();
    AugmentationGraph::build(&dist, &kernel).unwrap()
}

fn random_features(n: usize, k: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    FeatureTable::new(DMatrix::from_fn(n, k, |_, _| {
        rng.sample::<f64, _>(StandardNormal)
    }))
    .unwrap()
}

fn verdict(criterion: &str, pass: bool, detail: &str, started: Instant, budget_secs: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion {criterion}: {} ({detail}; {elapsed:.2}s of {budget_secs:.0}s budget)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
    assert!(
        elapsed < budget_secs,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.1}s"
    );
}

/// Criterion 1: the loss-equivalence identity on 50 random graphs.
#[test]
fn c01_loss_equivalence_identity() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let n_vert = 6 + (seed as usize % 15); // up to 20
        let g = generators::gen_random(4 + seed as usize % 3, n_vert, 2, seed).unwrap();
        let f = random_features(g.len(), 3, 10_000 + seed);
        let lhs = population_loss(&g, &f).unwrap() + loss_constant(&g);
        let rhs =
            augraph::spectral::mf_loss(&g.normalized_matrices(), &f.to_embedding(&g).unwrap())
                .unwrap();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300));
    }
    verdict(
        "01 loss-equivalence",
        worst <= 1e-9,
        &format!("worst relative gap {worst:.2e} over 50 graphs"),
        started,
        10.0,
    );
}

/// Criterion 2: nonparametric training recovers the top-k eigenspace on
/// gapped graphs.
#[test]
fn c02_eigenvector_recovery() {
    let started = Instant::now();
    let mut successes = 0;
    let mut runs = 0;
    let mut seed = 0u64;
    while runs < 20 {
        let n_vert = 8 + (seed as usize % 7);
        let g = generators::gen_random(4 + (seed as usize % 3), n_vert, 2, seed).unwrap();
        let probe_dec = SpectralDecomposition::compute(&g.normalized_matrices(), 1).unwrap();
        let chosen_k = (2..=4usize).find(|&k| {
            probe_dec.gamma(k) - probe_dec.gamma(k + 1) > 0.05 && probe_dec.gamma(k) > 0.05
        });
        seed += 1;
        let Some(k) = chosen_k else { continue };
        runs += 1;

        let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k).unwrap();
        let mut cfg = TrainConfig::full_population(k);
        cfg.max_steps = 60_000;
        cfg.grad_tolerance = 1e-9;
        cfg.seed = 1_000 + seed;
        let (f, hist) = train_nonparametric(&g, &cfg).unwrap();
        let optimum = population_loss_optimum(&dec, &g, k).unwrap();
        let excess = hist.last().unwrap() - optimum;
        let emb = f.to_embedding(&g).unwrap();
        let angles = principal_angles(emb.as_matrix(), &dec.f_star()).unwrap();
        let max_angle = angles.iter().cloned().fold(0.0f64, f64::max);
        if excess < 1e-3 && max_angle < 1e-2 {
            successes += 1;
        }
    }
    verdict(
        "02 eigenvector-recovery",
        successes >= 19,
        &format!("{successes}/20 runs within 1e-3 loss and 1e-2 rad"),
        started,
        120.0,
    );
}

/// Criterion 3: exact recovery at α = 0 on disconnected-class block graphs.
#[test]
fn c03_exact_recovery_alpha_zero() {
    let started = Instant::now();
    let mut successes = 0;
    for seed in 0..10u64 {
        let g = generators::gen_blocks(&BlockSpec {
            classes: 2,
            blocks_per_class: 2,
            naturals_per_block: 1,
            augmentations_per_natural: 2,
            cross_block_mass: 0.05 + 0.01 * (seed % 5) as f64,
            cross_class_mass: 0.0,
            seed,
        })
        .unwrap();
        let (alpha, _) = bayes_alpha(&g);
        assert_eq!(alpha, 0.0, "block generator must give alpha = 0 here");
        let k = 4; // = 2r = number of blocks
        let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k).unwrap();
        let mut cfg = TrainConfig::full_population(k);
        cfg.max_steps = 40_000;
        cfg.grad_tolerance = 1e-9;
        cfg.seed = 2_000 + seed;
        let (f, _) = train_nonparametric(&g, &cfg).unwrap();
        let c_lambda = dec.gamma(k).max(1e-6);
        let probe = fit_probe_capped(&f, &g, c_lambda, &ProbeFitConfig::default()).unwrap();
        let report = probe_error(&f, &probe, &g).unwrap();
        if report.ensemble_error == 0.0 {
            successes += 1;
        }
    }
    verdict(
        "03 exact-recovery-alpha-zero",
        successes == 10,
        &format!("{successes}/10 seeds at exactly zero ensemble error"),
        started,
        60.0,
    );
}

/// Criterion 4: the eigenvalue-form error bound with its constructed-probe
/// quadratic and norm clauses, on 50 nearly-disconnected graphs.
#[test]
fn c04_eigenvalue_bound() {
    let started = Instant::now();
    let mut holds = 0;
    for seed in 0..50u64 {
        let r = 2 + (seed as usize % 2);
        let b = 1 + (seed as usize % 2);
        let g = generators::gen_blocks(&BlockSpec {
            classes: r,
            blocks_per_class: b,
            naturals_per_block: 1,
            augmentations_per_natural: 2,
            cross_block_mass: [0.0, 0.05, 0.1][seed as usize % 3],
            cross_class_mass: 0.004 + 0.004 * (seed % 5) as f64,
            seed,
        })
        .unwrap();
        let k = r * b;
        let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k).unwrap();
        let (_, yhat) = bayes_alpha(&g);
        let b2 = bound_b2(&g, &dec, &yhat, k, None, 700 + seed).unwrap();
        if b2.error.holds && b2.quadratic.holds && b2.norm.holds {
            holds += 1;
        } else {
            println!(
                "  seed {seed}: error {:?} quad {:?} norm {:?}",
                b2.error, b2.quadratic, b2.norm
            );
        }
    }
    verdict(
        "04 eigenvalue-bound",
        holds == 50,
        &format!("{holds}/50 graphs satisfied all three clauses"),
        started,
        300.0,
    );
}

/// Criterion 5: ε-optimal bound and projection residuals on early-stopped
/// runs.
#[test]
fn c05_epsilon_optimal_bound() {
    let started = Instant::now();
    let mut holds = 0;
    for seed in 0..20u64 {
        let g = generators::gen_blocks(&BlockSpec {
            classes: 2,
            blocks_per_class: 2,
            naturals_per_block: 1,
            augmentations_per_natural: 2,
            cross_block_mass: 0.06 + 0.01 * (seed % 4) as f64,
            cross_class_mass: 0.005 + 0.002 * (seed % 3) as f64,
            seed,
        })
        .unwrap();
        let k = 4;
        let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k).unwrap();
        let (_, yhat) = bayes_alpha(&g);
        // Early stop: coarse gradient tolerance leaves a measurable ε.
        let mut cfg = TrainConfig::full_population(k);
        cfg.grad_tolerance = 3e-3;
        cfg.max_steps = 4_000;
        cfg.seed = 3_000 + seed;
        let (f, _) = train_nonparametric(&g, &cfg).unwrap();
        let d2 = bound_d2(&g, &dec, &yhat, k, &f, seed).unwrap();
        assert!(
            d2.epsilon < (1.0 - dec.lambda(k)).powi(2),
            "epsilon precondition must hold by construction"
        );
        if d2.error.holds && d2.residuals_hold {
            holds += 1;
        } else {
            println!("  seed {seed}: {:?} residuals {:?}", d2.error, d2.residuals);
        }
    }
    verdict(
        "05 epsilon-optimal-bound",
        holds == 20,
        &format!("{holds}/20 early-stopped runs satisfied bound and residuals"),
        started,
        180.0,
    );
}

/// Criterion 6: exact partition oracle values and monotonicity.
#[test]
fn c06_partition_oracle() {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    // Hand-derived values on the reference graph.
    let g = g0();
    let rho2 = sparsest_m_partition(&g, 2, SelfLoops::Include).unwrap().rho;
    let rho3 = sparsest_m_partition(&g, 3, SelfLoops::Include).unwrap().rho;
    if rho2 != 0.0 || (rho3 - 0.5).abs() > 1e-12 {
        pass = false;
        detail = format!("reference values rho2={rho2}, rho3={rho3}");
    }

    // Monotonicity and the zero-self-loop identities on enumerable graphs.
    let mut graphs: Vec<AugmentationGraph> = vec![g0()];
    for seed in [1u64, 2, 3] {
        graphs.push(generators::gen_random(4, 6 + 2 * (seed as usize % 3), 2, seed).unwrap());
    }
    graphs.push(
        generators::gen_blocks(&BlockSpec {
            classes: 2,
            blocks_per_class: 1,
            naturals_per_block: 3,
            augmentations_per_natural: 2,
            cross_block_mass: 0.0,
            cross_class_mass: 0.02,
            seed: 4,
        })
        .unwrap(),
    );
    for (gi, g) in graphs.iter().enumerate() {
        let n = g.len();
        assert!(n <= 12, "test graphs stay enumerable");
        let mut prev = 0.0;
        for m in 2..=n {
            let rho = sparsest_m_partition(g, m, SelfLoops::Include).unwrap().rho;
            if rho < prev - 1e-12 {
                pass = false;
                detail = format!("graph {gi}: rho_{m} = {rho} < rho_{} = {prev}", m - 1);
            }
            prev = rho;
        }
        for x in 0..n {
            let phi = conductance(g, &[x], SelfLoops::Exclude).unwrap();
            if (phi - 1.0).abs() > 1e-12 {
                pass = false;
                detail = format!("graph {gi}: singleton conductance {phi}");
            }
        }
        let rho_n = sparsest_m_partition(g, n, SelfLoops::Exclude).unwrap().rho;
        if (rho_n - 1.0).abs() > 1e-12 {
            pass = false;
            detail = format!("graph {gi}: rho_N = {rho_n}");
        }
    }
    if pass {
        detail = format!("{} graphs, full m sweeps, both conventions", graphs.len());
    }
    verdict("06 partition-oracle", pass, &detail, started, 120.0);
}

/// Criterion 7: Bayes-labeling inequalities, the Rayleigh identity, and the
/// span-approximation bound.
#[test]
fn c07_labeling_and_rayleigh_lemmas() {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    for seed in 0..10u64 {
        let g = generators::gen_random(5, 10, 2, 400 + seed).unwrap();
        let m = g.normalized_matrices();
        let (alpha, yhat) = bayes_alpha(&g);
        let phi = phi_hat(&g, &yhat);
        let delta = delta_mismatch(&g, &yhat);
        if phi > 2.0 * alpha + 1e-10 {
            pass = false;
            detail = format!("phi {phi} > 2 alpha {alpha}");
        }
        // Bayes labeling maximizes the per-vertex posterior, so these two
        // sums are the same floats.
        if delta != alpha {
            pass = false;
            detail = format!("delta {delta} != alpha {alpha}");
        }
        for class in 1..=g.num_classes() {
            let u = class_indicator_vector(&g, &yhat, class);
            if u.norm_squared() == 0.0 {
                continue;
            }
            let rq = rayleigh_quotient(&m, &u).unwrap();
            let phi_i = phi_class(&g, &yhat, class).unwrap();
            if (rq - 0.5 * phi_i).abs() > 1e-10 {
                pass = false;
                detail = format!("rayleigh identity off by {:.2e}", (rq - 0.5 * phi_i).abs());
            }
        }
    }

    // Span-approximation bound on 100 random vectors.
    let g = generators::gen_random(5, 10, 2, 99).unwrap();
    let m = g.normalized_matrices();
    let dec = SpectralDecomposition::compute(&m, 5).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..100 {
        let u = DVector::from_fn(g.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let k = 1 + rng.gen_range(0..5usize);
        if dec.lambda(k + 1) <= 1e-12 {
            continue;
        }
        let (b, residual) = approximate_in_span(&dec, &m, &u, k).unwrap();
        let bound = rayleigh_quotient(&m, &u).unwrap() / dec.lambda(k + 1) * u.norm_squared();
        if residual > bound + 1e-9 || b.norm() > u.norm() + 1e-9 {
            pass = false;
            detail = format!("span bound violated: residual {residual} vs {bound}");
        }
        checked += 1;
    }
    if pass {
        detail = format!("10 graphs, {checked} random span checks");
    }
    verdict("07 labeling-rayleigh-lemmas", pass, &detail, started, 60.0);
}

/// Criterion 8: empirical-loss unbiasedness, 2000 replicates of n = 8.
#[test]
fn c08_empirical_loss_unbiased() {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for graph_seed in 0..5u64 {
        let g = generators::gen_random(5, 10, 2, 500 + graph_seed).unwrap();
        let f = random_features(g.len(), 2, 600 + graph_seed);
        let pop = population_loss(&g, &f).unwrap();
        let reps = 2_000;
        let mut values = Vec::with_capacity(reps);
        for rep in 0..reps {
            let samples = sample_naturals(&g, 8, 1_000_000 + graph_seed * 10_000 + rep as u64);
            values.push(empirical_loss(&g, &f, &samples).unwrap());
        }
        let mean: f64 = values.iter().sum::<f64>() / reps as f64;
        let var: f64 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let z = (mean - pop).abs() / se.max(1e-15);
        if z > 3.0 {
            pass = false;
            detail = format!("graph {graph_seed}: z = {z:.2}");
        }
    }
    if pass {
        detail = "5 graphs within 3 standard errors".into();
    }
    verdict("08 empirical-unbiasedness", pass, &detail, started, 120.0);
}

/// Criterion 9: analytic gradient vs central finite differences.
#[test]
fn c09_gradient_correctness() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    for seed in 0..20u64 {
        let g = generators::gen_random(4, 6 + (seed as usize % 6), 2, 800 + seed).unwrap();
        let k = 3;
        let f = FeatureTable::new(DMatrix::from_fn(g.len(), k, |_, _| {
            rng.gen_range(-1.0..1.0)
        }))
        .unwrap();
        let analytic = analytic_gradient(&g, &f).unwrap();
        let h = 1e-5;
        for i in 0..g.len() {
            for j in 0..k {
                let mut plus = f.as_matrix().clone();
                plus[(i, j)] += h;
                let mut minus = f.as_matrix().clone();
                minus[(i, j)] -= h;
                let lp = population_loss(&g, &FeatureTable::new(plus).unwrap()).unwrap();
                let lm = population_loss(&g, &FeatureTable::new(minus).unwrap()).unwrap();
                let numeric = (lp - lm) / (2.0 * h);
                let rel = (analytic[(i, j)] - numeric).abs()
                    / analytic[(i, j)].abs().max(numeric.abs()).max(1.0);
                worst = worst.max(rel);
            }
        }
    }
    verdict(
        "09 gradient-correctness",
        worst <= 1e-5,
        &format!("worst relative entry error {worst:.2e} over 20 instances"),
        started,
        30.0,
    );
}

/// Criterion 10: prediction invariance under diagonal/right transforms and
/// the feature-norm bound of converged minimizers.
#[test]
fn c10_invariance_and_norm_bound() {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    // Ten seeded (F, B, D, Q) tuples on a 20-vertex graph.
    let g = generators::gen_random(6, 20, 3, 900).unwrap();
    let f = random_features(g.len(), 3, 901);
    let mut rng = ChaCha12Rng::seed_from_u64(902);
    let b = LinearProbe::new(
        DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal)),
        None,
    )
    .unwrap();
    for tuple in 0..10u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(910 + tuple);
        let d = DVector::from_fn(g.len(), |_, _| rng.gen_range(0.05..5.0f64));
        let mut q = random_orthonormal(3, &mut rng);
        for i in 0..3 {
            q.column_mut(i).scale_mut(rng.gen_range(0.5..2.0));
        }
        let t = transform_probe(&f, &b, &d, &q).unwrap();
        for x in 0..g.len() {
            if predict(&f, &b, x).unwrap() != predict(&t.features, &t.probe, x).unwrap() {
                pass = false;
                detail = format!("tuple {tuple}: prediction changed at vertex {x}");
            }
        }
    }

    // Converged minimizers have E‖f‖² ≤ k.
    let mut checked = 0;
    for seed in 0..20u64 {
        let k = if seed % 2 == 0 { 2 } else { 4 };
        let g = generators::gen_random(5, 8 + (seed as usize % 5), 2, 950 + seed).unwrap();
        let mut cfg = TrainConfig::full_population(k);
        cfg.grad_tolerance = 1e-9;
        cfg.max_steps = 60_000;
        cfg.seed = seed;
        let (f, _) = train_nonparametric(&g, &cfg).unwrap();
        let norm = feature_sq_norm(&f, &g).unwrap();
        if norm > k as f64 + 1e-6 {
            pass = false;
            detail = format!("seed {seed}: E‖f‖² = {norm} > k = {k}");
        }
        checked += 1;
    }
    if pass {
        detail = format!("10 transform tuples exact, {checked}/20 norm bounds");
    }
    verdict("10 invariance-and-norm", pass, &detail, started, 30.0);
}

/// Spearman rank correlation with midranks for ties.
fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && vals[order[j + 1]] == vals[order[i]] {
                j += 1;
            }
            let mid = (i + j) as f64 / 2.0;
            for &idx in &order[i..=j] {
                ranks[idx] = mid;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt()).max(1e-300)
}

/// Criterion 11: qualitative trends. Reported, not gated.
#[test]
fn c11_qualitative_trends_reported() {
    let started = Instant::now();

    // (a) ρ_{⌊k/2⌋} nondecreasing in σ. Reported at the pinned σ set and at
    // a wider set where the conductances carry real signal.
    let report_rho = |sigmas: &[f64], label: &str| {
        let mut nondecreasing = 0;
        for seed in 0..10u64 {
            let mut rhos = Vec::new();
            for &sigma in sigmas {
                let spec = ManifoldSpec {
                    sigma,
                    n_naturals: 6,
                    atoms_per_natural: 2,
                    means: vec![vec![1.2, 0.0], vec![0.0, 1.2]],
                    seed,
                    ..Default::default()
                };
                let (g, _) = generators::gen_manifold(&spec).unwrap();
                // k = 6 ⇒ ⌊k/2⌋ = 3.
                rhos.push(sparsest_m_partition(&g, 3, SelfLoops::Include).unwrap().rho);
            }
            if rhos.windows(2).all(|w| w[1] >= w[0] - 1e-12) {
                nondecreasing += 1;
            }
        }
        println!(
            "criterion 11a rho-vs-sigma [{label}]: {nondecreasing}/10 seeds nondecreasing \
             (reported, target >= 8)"
        );
        nondecreasing
    };
    let pinned = report_rho(&[0.05, 0.1, 0.2], "sigma 0.05/0.1/0.2");
    let wide = report_rho(&[0.35, 0.5, 0.7], "sigma 0.35/0.5/0.7");

    // (b) labeled-n error trend: nonincreasing from n = 8 to n = 128.
    let g = generators::gen_blocks(&BlockSpec {
        classes: 2,
        blocks_per_class: 1,
        naturals_per_block: 2,
        augmentations_per_natural: 3,
        cross_block_mass: 0.0,
        cross_class_mass: 0.05,
        seed: 6,
    })
    .unwrap();
    let mut cfg = TrainConfig::full_population(4);
    cfg.seed = 3;
    let (f, _) = train_nonparametric(&g, &cfg).unwrap();
    let mut improving = 0;
    for seed in 0..10u64 {
        let mut errs = Vec::new();
        for &n in &[8usize, 32, 128] {
            let samples = sample_labeled(&g, n, 11_000 + seed);
            let cfg = ProbeFitConfig {
                mode: ProbeFitMode::Samples(samples),
                ..Default::default()
            };
            let probe = fit_probe_capped(&f, &g, 0.5, &cfg).unwrap();
            errs.push(probe_error(&f, &probe, &g).unwrap().ensemble_error);
        }
        if errs[2] <= errs[0] + 1e-12 {
            improving += 1;
        }
    }
    println!(
        "criterion 11b labeled-n-trend: {improving}/10 seeds nonincreasing from n=8 to n=128 \
         (reported, target >= 8)"
    );

    // (c) Spearman between the conductance-form shape and measured error
    // over a σ sweep in the connected regime, one sweep per seed with the
    // naturals held fixed across σ. Reported as the median over seeds.
    let sigmas = [0.5, 0.62, 0.74, 0.86, 0.98, 1.1];
    let mut per_seed = Vec::new();
    for seed in [3u64, 5, 7, 9, 11] {
        let mut shapes = Vec::new();
        let mut errors = Vec::new();
        for &sigma in &sigmas {
            let spec = ManifoldSpec {
                sigma,
                n_naturals: 14,
                atoms_per_natural: 1,
                means: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                seed,
                ..Default::default()
            };
            let (g, _) = generators::gen_manifold(&spec).unwrap();
            let (alpha, _) = bayes_alpha(&g);
            let k = 6;
            let rho = sparsest_m_partition(&g, k / 2, SelfLoops::Include)
                .unwrap()
                .rho;
            shapes.push(if rho > 0.0 {
                bound_3_7_shape(alpha, rho, k).unwrap()
            } else {
                f64::INFINITY
            });
            let mut cfg = TrainConfig::full_population(k);
            cfg.seed = 13;
            cfg.max_steps = 30_000;
            cfg.grad_tolerance = 1e-8;
            let (f, _) = train_nonparametric(&g, &cfg).unwrap();
            let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k).unwrap();
            let probe =
                fit_probe_capped(&f, &g, dec.gamma(k).max(1e-3), &ProbeFitConfig::default())
                    .unwrap();
            errors.push(probe_error(&f, &probe, &g).unwrap().augmented_error);
        }
        per_seed.push(spearman(&shapes, &errors));
    }
    let mut sorted = per_seed.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    println!(
        "criterion 11c shape-anticorrelation: median Spearman {median:.3} over {} settings \
         x {} seeds (reported, target <= -0.5); per-seed {:?}",
        sigmas.len(),
        per_seed.len(),
        per_seed
            .iter()
            .map(|c| format!("{c:.2}"))
            .collect::<Vec<_>>()
    );

    // Reported, not gated: the only assertion is that everything ran.
    let pass = pinned <= 10 && wide <= 10 && improving <= 10 && median.is_finite();
    verdict(
        "11 qualitative-trends",
        pass,
        &format!(
            "reported: rho-trend {pinned}/10 (pinned) {wide}/10 (wide), \
             n-trend {improving}/10, median Spearman {median:.3}"
        ),
        started,
        600.0,
    );
}
