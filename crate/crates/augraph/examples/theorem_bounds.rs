//! Evaluate the explicit-constant error bounds on a nearly-disconnected
//! graph: the eigenvalue-form bound with its constructed probe, and the
//! ε-optimal form on an early-stopped run with projection residuals.
//!
//! Run with `cargo run --example theorem_bounds`.

use augraph::bounds::{bound_b2, bound_d2};
use augraph::generators::{self, BlockSpec};
use augraph::partition::bayes_alpha;
use augraph::spectral::SpectralDecomposition;
use augraph::trainer::{train_nonparametric, TrainConfig};

fn main() -> augraph::Result<()> {
    let g = generators::gen_blocks(&BlockSpec {
        classes: 2,
        blocks_per_class: 2,
        naturals_per_block: 1,
        augmentations_per_natural: 2,
        cross_block_mass: 0.07,
        cross_class_mass: 0.01,
        seed: 3,
    })?;
    let k = 4;
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
    let (alpha, yhat) = bayes_alpha(&g);
    println!(
        "alpha = {alpha:.5}, lambda_k = {:.4}, lambda_k+1 = {:.4}",
        dec.lambda(k),
        dec.lambda(k + 1)
    );

    let b2 = bound_b2(&g, &dec, &yhat, k, None, 1)?;
    println!("\neigenvalue-form bound:");
    println!(
        "  0-1 error:  measured {:.5} <= bound {:.5}  [{}]",
        b2.error.measured_value,
        b2.error.bound_value,
        if b2.error.holds { "holds" } else { "VIOLATED" }
    );
    println!(
        "  quadratic:  measured {:.6} <= bound {:.6}  [{}]",
        b2.quadratic.measured_value,
        b2.quadratic.bound_value,
        if b2.quadratic.holds {
            "holds"
        } else {
            "VIOLATED"
        }
    );
    println!(
        "  probe norm: {:.4} <= {:.4}  [{}] (alignment residual {:.1e})",
        b2.norm.measured_value,
        b2.norm.bound_value,
        if b2.norm.holds { "holds" } else { "VIOLATED" },
        b2.procrustes_residual
    );

    // Early-stopped features: a coarse gradient tolerance leaves a
    // measurable loss excess ε.
    let mut cfg = TrainConfig::full_population(k);
    cfg.grad_tolerance = 3e-3;
    cfg.max_steps = 4_000;
    cfg.seed = 9;
    let (f, _) = train_nonparametric(&g, &cfg)?;
    let d2 = bound_d2(&g, &dec, &yhat, k, &f, 9)?;
    println!(
        "\nε-optimal bound (ε = {:.2e}, best k' = {}):",
        d2.epsilon, d2.k_prime_star
    );
    println!(
        "  0-1 error:  measured {:.5} <= bound {:.5}  [{}]",
        d2.error.measured_value,
        d2.error.bound_value,
        if d2.error.holds { "holds" } else { "VIOLATED" }
    );
    println!("  projection residuals of the top-{k} eigenvectors:");
    for r in &d2.residuals {
        println!(
            "    v_{}: {:.3e} <= {:.3e}  [{}]",
            r.i,
            r.residual_sq,
            r.bound,
            if r.holds { "holds" } else { "VIOLATED" }
        );
    }
    Ok(())
}
