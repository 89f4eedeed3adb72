//! The population loss, its additive-constant relation to the
//! matrix-factorization loss, the unbiased empirical form, and the
//! SimCLR-style baseline on the same batch.
//!
//! Run with `cargo run --example contrastive_losses`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use augraph::contrastive::{
    empirical_loss, loss_constant, minibatch_loss, population_loss, sample_naturals, simclr_loss,
    FeatureTable,
};
use augraph::generators;
use augraph::spectral::mf_loss;

fn main() -> augraph::Result<()> {
    let g = generators::gen_random(5, 10, 2, 3)?;
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let f = FeatureTable::new(DMatrix::from_fn(g.len(), 3, |_, _| {
        rng.gen_range(-1.0..1.0)
    }))?;

    let pop = population_loss(&g, &f)?;
    let constant = loss_constant(&g);
    let mf = mf_loss(&g.normalized_matrices(), &f.to_embedding(&g)?)?;
    println!("population loss          {pop:.12}");
    println!("graph constant ‖Ā‖_F²    {constant:.12}");
    println!("matrix-factorization     {mf:.12}");
    println!(
        "identity gap             {:.2e}",
        (pop + constant - mf).abs()
    );

    // The empirical loss is an unbiased estimator: average it over
    // resampled datasets and watch it approach the population value.
    for reps in [50usize, 500, 5000] {
        let mean: f64 = (0..reps)
            .map(|r| {
                let samples = sample_naturals(&g, 8, 10_000 + r as u64);
                empirical_loss(&g, &f, &samples).unwrap()
            })
            .sum::<f64>()
            / reps as f64;
        println!("empirical mean over {reps:5} datasets: {mean:.6} (population {pop:.6})");
    }

    // Minibatch loss vs the SimCLR-style rewrite on one batch of pairs.
    let batch: Vec<(DVector<f64>, DVector<f64>)> = (0..6)
        .map(|_| {
            let z = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
            let zp = &z + DVector::from_fn(3, |_, _| 0.1 * rng.gen_range(-1.0..1.0f64));
            (z, zp)
        })
        .collect();
    println!("minibatch loss           {:.6}", minibatch_loss(&batch)?);
    println!("simclr baseline (τ = 1)  {:.6}", simclr_loss(&batch, 1.0)?);
    println!("simclr baseline (τ = ½)  {:.6}", simclr_loss(&batch, 0.5)?);
    Ok(())
}
