//! Thin command-line wrapper over the augraph library: reproducible
//! generation, spectral reports, training, probing, and theorem
//! verification with machine-readable reports.
//!
//! Exit codes: 0 success, 1 a verified bound failed, 2 usage/input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use augraph::bounds::{bound_b2, bound_d2};
use augraph::contrastive::{loss_constant, population_loss, FeatureTable};
use augraph::error::{Error, Result};
use augraph::generators::GeneratorSpec;
use augraph::graph::{deserialize_graph, graph_digest, serialize_graph, AugmentationGraph};
use augraph::partition::{
    bayes_alpha, conductance, delta_mismatch, phi_hat, rayleigh_quotient, sparsest_m_partition,
    SelfLoops, EXACT_PARTITION_CAP,
};
use augraph::probe::{fit_probe_capped, probe_error, sample_labeled, ProbeFitConfig, ProbeFitMode};
use augraph::report::{CheckRecord, RunManifest, VerificationReport};
use augraph::spectral::SpectralDecomposition;
use augraph::trainer::{
    deserialize_checkpoint, serialize_checkpoint, train_minibatch, train_nonparametric, Activation,
    Checkpoint, FeatureMap, TrainConfig, TrainMode,
};

#[derive(Parser)]
#[command(
    name = "augraph",
    version,
    about = "Augmentation-graph spectral laboratory"
)]
struct Cli {
    /// Default seed; AUGRAPH_SEED is used when the flag is absent.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file from a generator spec file.
    Generate {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a graph file and print its digest.
    Check { graph: PathBuf },
    /// Eigendecomposition report for a graph.
    Spectral {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train features and write a checkpoint plus a loss CSV.
    Train {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        /// nonparametric | minibatch
        #[arg(long, default_value = "nonparametric")]
        mode: String,
        #[arg(long, default_value_t = 0.2)]
        lr: f64,
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-8)]
        grad_tol: f64,
        /// Sphere projection radius² (minibatch mode).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        /// Hidden layer widths of the parametric map (minibatch mode).
        #[arg(long, value_delimiter = ',')]
        hidden: Vec<usize>,
        /// relu | tanh | identity
        #[arg(long, default_value = "tanh")]
        activation: String,
        #[arg(long)]
        out_checkpoint: PathBuf,
        #[arg(long)]
        out_loss: PathBuf,
    },
    /// Run a verification suite and write a report.
    Verify {
        graph: PathBuf,
        /// b2 | d2 | lemmas | partitions | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint with a fitted linear probe.
    Probe {
        graph: PathBuf,
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        c_lambda: f64,
        /// Comma-separated labeled-sample sizes; empty = population fit.
        #[arg(long, value_delimiter = ',')]
        n_labeled: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-n error CSV (with --n-labeled).
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let seed = cli
        .seed
        .or_else(|| {
            std::env::var("AUGRAPH_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);
    match run(cli.command, seed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_graph(path: &Path) -> Result<(AugmentationGraph, String)> {
    let bytes = std::fs::read(path)?;
    let g = deserialize_graph(&bytes)?;
    Ok((g, graph_digest(&bytes)))
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn run(cmd: Command, seed: u64) -> Result<ExitCode> {
    match cmd {
        Command::Generate { spec, out } => {
            let text = std::fs::read_to_string(&spec)?;
            let spec: GeneratorSpec =
                serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("{e}")))?;
            let g = spec.generate()?;
            let bytes = serialize_graph(&g)?;
            write_out(&out, &bytes)?;
            println!(
                "graph {} vertices, digest {}",
                g.len(),
                graph_digest(&bytes)
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Check { graph } => {
            let (g, digest) = load_graph(&graph)?;
            println!(
                "ok: {} vertices, {} naturals, {} classes, digest {digest}",
                g.len(),
                g.naturals().len(),
                g.num_classes()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Spectral { graph, k, out } => {
            let start = Instant::now();
            let (g, digest) = load_graph(&graph)?;
            let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
            let mut manifest = RunManifest::new("spectral", seed, &digest).flag("k", k);
            manifest.wall_time_secs = start.elapsed().as_secs_f64();
            let report = serde_json::json!({
                "manifest": manifest,
                "k": k,
                "eigenvalues": dec.gammas().iter().copied().collect::<Vec<f64>>(),
                "laplacian_eigenvalues": dec.lambdas().iter().copied().collect::<Vec<f64>>(),
                "lambda_1": dec.lambda(1),
                "frobenius_sq": loss_constant(&g),
            });
            let bytes = serde_json::to_vec_pretty(&report)?;
            match out {
                Some(path) => write_out(&path, &bytes)?,
                None => println!("{}", String::from_utf8_lossy(&bytes)),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Train {
            graph,
            k,
            mode,
            lr,
            steps,
            grad_tol,
            mu,
            batch_size,
            hidden,
            activation,
            out_checkpoint,
            out_loss,
        } => {
            let (g, _) = load_graph(&graph)?;
            let (checkpoint, history) = match mode.as_str() {
                "nonparametric" => {
                    let cfg = TrainConfig {
                        k,
                        learning_rate: lr,
                        max_steps: steps,
                        grad_tolerance: grad_tol,
                        init_scale: None,
                        seed,
                        mode: TrainMode::FullPopulation,
                        sphere_radius_sq: None,
                    };
                    let (table, history) = train_nonparametric(&g, &cfg)?;
                    (Checkpoint::Table(table), history)
                }
                "minibatch" => {
                    let payload_dim = g.payloads().ok_or(Error::MissingPayload)?.ncols();
                    let act = match activation.as_str() {
                        "relu" => Activation::Relu,
                        "tanh" => Activation::Tanh,
                        "identity" => Activation::Identity,
                        other => {
                            return Err(Error::InvalidSpec(format!("unknown activation {other:?}")))
                        }
                    };
                    let mut dims = vec![payload_dim];
                    dims.extend(&hidden);
                    dims.push(k);
                    let map = FeatureMap::new(&dims, act, mu, 0.5, seed)?;
                    let cfg = TrainConfig {
                        k,
                        learning_rate: lr,
                        max_steps: steps,
                        grad_tolerance: 0.0,
                        init_scale: None,
                        seed,
                        mode: TrainMode::Minibatch { batch_size },
                        sphere_radius_sq: mu,
                    };
                    let (trained, history) = train_minibatch(&g, &map, &cfg)?;
                    (Checkpoint::Map(trained), history)
                }
                other => return Err(Error::InvalidSpec(format!("unknown mode {other:?}"))),
            };
            write_out(&out_checkpoint, &serialize_checkpoint(&checkpoint)?)?;
            let mut csv = String::from("step,loss\n");
            for (i, l) in history.iter().enumerate() {
                csv.push_str(&format!("{i},{l:.17e}\n"));
            }
            write_out(&out_loss, csv.as_bytes())?;
            println!(
                "final loss {:.6e} after {} steps",
                history.last().unwrap(),
                history.len()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            graph,
            suite,
            k,
            out,
        } => {
            let start = Instant::now();
            let (g, digest) = load_graph(&graph)?;
            let mut report = VerificationReport::new(
                RunManifest::new("verify", seed, &digest).flag("suite", &suite),
            );
            match suite.as_str() {
                "b2" => suite_b2(&g, k, seed, &mut report)?,
                "d2" => suite_d2(&g, k, seed, &mut report)?,
                "lemmas" => suite_lemmas(&g, k, seed, &mut report)?,
                "partitions" => suite_partitions(&g, &mut report)?,
                "all" => {
                    suite_lemmas(&g, k, seed, &mut report)?;
                    suite_partitions(&g, &mut report)?;
                    suite_b2(&g, k, seed, &mut report)?;
                    suite_d2(&g, k, seed, &mut report)?;
                }
                other => return Err(Error::InvalidSpec(format!("unknown suite {other:?}"))),
            }
            report.manifest.wall_time_secs = start.elapsed().as_secs_f64();
            print!("{}", report.render_table());
            if let Some(path) = out {
                write_out(&path, &report.to_json()?)?;
            }
            if report.all_hold() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }

        Command::Probe {
            graph,
            checkpoint,
            c_lambda,
            n_labeled,
            out,
            out_csv,
        } => {
            let start = Instant::now();
            let (g, digest) = load_graph(&graph)?;
            let bytes = std::fs::read(&checkpoint)?;
            let cp = deserialize_checkpoint(&bytes)?;
            let features = cp.features(&g)?;

            let population_probe =
                fit_probe_capped(&features, &g, c_lambda, &ProbeFitConfig::default())?;
            let population_report = probe_error(&features, &population_probe, &g)?;

            let mut per_n = Vec::new();
            for (i, &n) in n_labeled.iter().enumerate() {
                let samples = sample_labeled(&g, n, seed.wrapping_add(i as u64));
                let cfg = ProbeFitConfig {
                    mode: ProbeFitMode::Samples(samples),
                    ..Default::default()
                };
                let probe = fit_probe_capped(&features, &g, c_lambda, &cfg)?;
                let rep = probe_error(&features, &probe, &g)?;
                per_n.push((n, rep));
            }

            let mut manifest = RunManifest::new("probe", seed, &digest)
                .flag("c_lambda", c_lambda)
                .flag("checkpoint", checkpoint.display());
            manifest.wall_time_secs = start.elapsed().as_secs_f64();
            let doc = serde_json::json!({
                "manifest": manifest,
                "population_fit": population_report,
                "labeled_fits": per_n
                    .iter()
                    .map(|(n, r)| serde_json::json!({"n": n, "report": r}))
                    .collect::<Vec<_>>(),
            });
            let bytes = serde_json::to_vec_pretty(&doc)?;
            match out {
                Some(path) => write_out(&path, &bytes)?,
                None => println!("{}", String::from_utf8_lossy(&bytes)),
            }
            if let Some(path) = out_csv {
                let mut csv = String::from("n,augmented_error,ensemble_error\n");
                for (n, r) in &per_n {
                    csv.push_str(&format!(
                        "{n},{:.17e},{:.17e}\n",
                        r.augmented_error, r.ensemble_error
                    ));
                }
                write_out(&path, csv.as_bytes())?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Default embedding dimension: enough to cover the connected components
/// and 2r, capped so λ_{k+1} exists, backed off so the retained spectrum
/// stays positive.
fn auto_k(g: &AugmentationGraph, requested: Option<usize>) -> Result<usize> {
    if let Some(k) = requested {
        if k + 1 > g.len() {
            return Err(Error::DimensionTooLarge { k, n: g.len() });
        }
        return Ok(k);
    }
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), 1)?;
    let components = dec.gammas().iter().filter(|&&x| x > 1.0 - 1e-9).count();
    let mut k = (2 * g.num_classes()).max(components).min(g.len() - 1);
    while k > components && dec.gamma(k) <= 1e-9 {
        k -= 1;
    }
    Ok(k)
}

fn record(name: &str, kind: &str, measured: f64, bound: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        kind: kind.into(),
        inputs: Default::default(),
        bound: Some(bound),
        measured: Some(measured),
        holds: Some(measured <= bound + tolerance),
        tolerance,
        notes: String::new(),
    }
}

fn skipped(name: &str, kind: &str, notes: String) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        kind: kind.into(),
        inputs: Default::default(),
        bound: None,
        measured: None,
        holds: None,
        tolerance: 0.0,
        notes,
    }
}

fn suite_lemmas(
    g: &AugmentationGraph,
    k: Option<usize>,
    seed: u64,
    report: &mut VerificationReport,
) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let k = auto_k(g, k)?;
    let m = g.normalized_matrices();
    let dec = SpectralDecomposition::compute(&m, k)?;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);

    // Loss-equivalence identity on random features.
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let f = FeatureTable::new(DMatrix::from_fn(g.len(), k, |_, _| {
            rng.gen_range(-1.0..1.0)
        }))?;
        let lhs = population_loss(g, &f)? + loss_constant(g);
        let rhs = augraph::spectral::mf_loss(&m, &f.to_embedding(g)?)?;
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    report.push(record(
        "loss-equivalence-identity",
        "lemma",
        worst,
        0.0,
        1e-9,
    ));

    // Bayes labeling: φ ≤ 2α, Δ ≤ α.
    let (alpha, yhat) = bayes_alpha(g);
    report.push(record(
        "phi-le-2alpha",
        "lemma",
        phi_hat(g, &yhat),
        2.0 * alpha,
        1e-10,
    ));
    report.push(record(
        "delta-le-alpha",
        "lemma",
        delta_mismatch(g, &yhat),
        alpha,
        1e-12,
    ));

    // Class-indicator Rayleigh identity.
    let mut worst = 0.0f64;
    for class in 1..=g.num_classes() {
        let u = augraph::partition::class_indicator_vector(g, &yhat, class);
        if u.norm_squared() == 0.0 {
            continue;
        }
        let r = rayleigh_quotient(&m, &u)?;
        let phi_i = augraph::partition::phi_class(g, &yhat, class)?;
        worst = worst.max((r - 0.5 * phi_i).abs());
    }
    report.push(record(
        "rayleigh-half-phi-identity",
        "lemma",
        worst,
        0.0,
        1e-10,
    ));

    // Eigenspace approximation bound on random vectors.
    if dec.lambda(k + 1) > 1e-12 {
        let mut violations = 0;
        for _ in 0..100 {
            let u = nalgebra::DVector::from_fn(g.len(), |_, _| rng.gen_range(-1.0..1.0f64));
            let (_, residual) = augraph::partition::approximate_in_span(&dec, &m, &u, k)?;
            let bound = rayleigh_quotient(&m, &u)? / dec.lambda(k + 1) * u.norm_squared();
            if residual > bound + 1e-9 {
                violations += 1;
            }
        }
        report.push(record(
            "span-approximation-bound",
            "lemma",
            violations as f64,
            0.0,
            0.0,
        ));
    } else {
        report.push(skipped(
            "span-approximation-bound",
            "lemma",
            format!("lambda_{} = 0", k + 1),
        ));
    }

    // Norm of a converged population minimizer is at most k.
    let mut cfg = TrainConfig::full_population(k);
    cfg.seed = seed;
    cfg.grad_tolerance = 1e-9;
    cfg.max_steps = 40_000;
    let (f, _) = train_nonparametric(g, &cfg)?;
    let norm = augraph::probe::feature_sq_norm(&f, g)?;
    report.push(record(
        "minimizer-feature-norm-le-k",
        "lemma",
        norm,
        k as f64,
        1e-6,
    ));
    Ok(())
}

fn suite_partitions(g: &AugmentationGraph, report: &mut VerificationReport) -> Result<()> {
    let n = g.len();
    if n > EXACT_PARTITION_CAP {
        report.push(skipped(
            "partition-suite",
            "partition",
            format!("N = {n} exceeds the exact enumeration cap {EXACT_PARTITION_CAP}"),
        ));
        return Ok(());
    }
    // Monotonicity of ρ_m, literal convention.
    let mut prev = 0.0;
    let mut monotone = true;
    let mut best_two_way = Vec::new();
    for m in 2..=n {
        let result = sparsest_m_partition(g, m, SelfLoops::Include)?;
        if m == 2 {
            best_two_way = result.best_partition.clone();
        }
        if result.rho < prev - 1e-12 {
            monotone = false;
        }
        prev = result.rho;
    }
    let mut check = record(
        "rho-monotone-in-m",
        "partition",
        if monotone { 0.0 } else { 1.0 },
        0.0,
        0.0,
    );
    check.notes = format!("sparsest 2-partition: {best_two_way:?}");
    report.push(check);

    // Zero-self-loop convention: singleton conductance 1, ρ_N = 1.
    let mut worst: f64 = 0.0;
    for x in 0..n {
        let phi = conductance(g, &[x], SelfLoops::Exclude)?;
        worst = worst.max((phi - 1.0).abs());
    }
    report.push(record(
        "singleton-conductance-one",
        "partition",
        worst,
        0.0,
        1e-12,
    ));
    let rho_n = sparsest_m_partition(g, n, SelfLoops::Exclude)?.rho;
    report.push(record(
        "rho-N-equals-one",
        "partition",
        (rho_n - 1.0).abs(),
        0.0,
        1e-12,
    ));
    Ok(())
}

fn suite_b2(
    g: &AugmentationGraph,
    k: Option<usize>,
    seed: u64,
    report: &mut VerificationReport,
) -> Result<()> {
    let k = auto_k(g, k)?;
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
    let (_, yhat) = bayes_alpha(g);
    match bound_b2(g, &dec, &yhat, k, None, seed) {
        Ok(b2) => {
            report.push(b2.error.to_check_record(augraph::bounds::BOUND_TOL));
            report.push(
                b2.quadratic
                    .to_check_record(augraph::bounds::CONSTRUCTED_TOL),
            );
            report.push(b2.norm.to_check_record(augraph::bounds::CONSTRUCTED_TOL));
        }
        Err(Error::ZeroSpectralGap(i)) => report.push(skipped(
            "error-vs-eigenvalue-bound",
            "bound",
            format!("skipped: lambda_{i} = 0 (more components than k)"),
        )),
        Err(Error::NegativeEigenvalue { index, .. }) => report.push(skipped(
            "error-vs-eigenvalue-bound",
            "bound",
            format!("skipped: gamma_{index} is not positive"),
        )),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn suite_d2(
    g: &AugmentationGraph,
    k: Option<usize>,
    seed: u64,
    report: &mut VerificationReport,
) -> Result<()> {
    let k = auto_k(g, k)?;
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
    let (_, yhat) = bayes_alpha(g);
    // Early-stopped run: coarse gradient tolerance gives a measurable ε.
    let mut cfg = TrainConfig::full_population(k);
    cfg.seed = seed;
    cfg.grad_tolerance = 1e-3;
    cfg.max_steps = 4_000;
    let (f, _) = train_nonparametric(g, &cfg)?;
    match bound_d2(g, &dec, &yhat, k, &f, seed) {
        Ok(d2) => {
            report.push(d2.error.to_check_record(augraph::bounds::BOUND_TOL));
            let worst = d2
                .residuals
                .iter()
                .map(|r| r.residual_sq - r.bound)
                .fold(f64::NEG_INFINITY, f64::max);
            report.push(record(
                "projection-residual-bounds",
                "bound",
                worst,
                0.0,
                augraph::bounds::RESIDUAL_TOL,
            ));
        }
        Err(Error::ZeroSpectralGap(i)) => report.push(skipped(
            "error-vs-epsilon-optimal-bound",
            "bound",
            format!("skipped: lambda_{i} = 0"),
        )),
        Err(Error::EpsilonTooLarge { eps, limit }) => report.push(skipped(
            "error-vs-epsilon-optimal-bound",
            "bound",
            format!("skipped: measured epsilon {eps:.3e} >= (1-lambda_k)^2 = {limit:.3e}"),
        )),
        Err(e) => return Err(e),
    }
    Ok(())
}
