//! Linear probes on trained features: capped quadratic fitting under a
//! norm budget, augmented vs ensembled error, labeled-sample fits, and the
//! prediction invariance under diagonal/right transforms.
//!
//! Run with `cargo run --example linear_probe`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use augraph::generators::{self, BlockSpec};
use augraph::probe::{
    fit_probe_capped, predict, probe_error, sample_labeled, transform_probe, ProbeFitConfig,
    ProbeFitMode,
};
use augraph::spectral::{random_orthonormal, SpectralDecomposition};
use augraph::trainer::{train_nonparametric, TrainConfig};

fn main() -> augraph::Result<()> {
    let g = generators::gen_blocks(&BlockSpec {
        classes: 2,
        blocks_per_class: 2,
        naturals_per_block: 1,
        augmentations_per_natural: 2,
        cross_block_mass: 0.08,
        cross_class_mass: 0.01,
        seed: 2,
    })?;
    let k = 4;
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
    let mut cfg = TrainConfig::full_population(k);
    cfg.seed = 4;
    let (f, _) = train_nonparametric(&g, &cfg)?;

    // Population fit under the norm budget ‖B‖_F ≤ 1/γ_k.
    let c_lambda = dec.gamma(k);
    let probe = fit_probe_capped(&f, &g, c_lambda, &ProbeFitConfig::default())?;
    let report = probe_error(&f, &probe, &g)?;
    println!("population fit (‖B‖ ≤ {:.3}):", 1.0 / c_lambda);
    println!("  augmented error {:.4}", report.augmented_error);
    println!("  ensemble error  {:.4}", report.ensemble_error);
    println!("  capped loss     {:.6}", report.capped_loss);
    println!(
        "  E‖f‖²           {:.4} (≤ k = {k})",
        report.feature_sq_norm
    );

    // Labeled-sample fits: error falls with the sample budget.
    for n in [8usize, 32, 128] {
        let cfg = ProbeFitConfig {
            mode: ProbeFitMode::Samples(sample_labeled(&g, n, 77)),
            ..Default::default()
        };
        let b = fit_probe_capped(&f, &g, c_lambda, &cfg)?;
        let r = probe_error(&f, &b, &g)?;
        println!("labeled n = {n:3}: ensemble error {:.4}", r.ensemble_error);
    }

    // Rescaling rows by any positive diagonal and rotating features by any
    // invertible Q (with B ← Q⁻¹B) never changes a prediction.
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let d = DVector::from_fn(g.len(), |_, _| rng.gen_range(0.1..5.0f64));
    let q = random_orthonormal(k, &mut rng);
    let t = transform_probe(&f, &probe, &d, &q)?;
    let same = (0..g.len())
        .all(|x| predict(&f, &probe, x).unwrap() == predict(&t.features, &t.probe, x).unwrap());
    println!(
        "transform (cond Q = {:.2}) preserves all predictions: {same}",
        t.q_condition
    );
    Ok(())
}
