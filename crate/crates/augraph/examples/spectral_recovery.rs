//! Train a nonparametric feature table and check that its weighted span
//! recovers the top-k eigenspace of the normalized adjacency.
//!
//! Run with `cargo run --example spectral_recovery`.

use augraph::contrastive::population_loss_optimum;
use augraph::generators;
use augraph::spectral::{principal_angles, SpectralDecomposition};
use augraph::trainer::{train_nonparametric, TrainConfig};

fn main() -> augraph::Result<()> {
    let g = generators::gen_random(5, 12, 2, 42)?;
    let k = 3;
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
    println!(
        "spectrum: {:?}",
        dec.gammas()
            .iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
    );
    println!("gap at k={k}: {:.4}", dec.gamma(k) - dec.gamma(k + 1));

    let mut cfg = TrainConfig::full_population(k);
    cfg.grad_tolerance = 1e-9;
    cfg.max_steps = 60_000;
    cfg.seed = 1;
    let (f, history) = train_nonparametric(&g, &cfg)?;
    let optimum = population_loss_optimum(&dec, &g, k)?;
    println!(
        "trained {} steps: loss {:.9} (optimum {:.9}, excess {:.2e})",
        history.len() - 1,
        history.last().unwrap(),
        optimum,
        history.last().unwrap() - optimum
    );

    let emb = f.to_embedding(&g)?;
    let angles = principal_angles(emb.as_matrix(), &dec.f_star())?;
    println!(
        "principal angles to the top-{k} eigenspace (rad): {:?}",
        angles
            .iter()
            .map(|a| format!("{a:.2e}"))
            .collect::<Vec<_>>()
    );
    Ok(())
}
