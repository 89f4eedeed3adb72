//! Conductance and exact sparsest m-partitions under both self-loop
//! conventions, plus the recoverability error α and its labeling
//! quantities.
//!
//! Run with `cargo run --example partitions`.

use augraph::generators::{self, BlockSpec};
use augraph::partition::{
    bayes_alpha, conductance, delta_mismatch, phi_hat, sparsest_m_partition, SelfLoops,
};

fn main() -> augraph::Result<()> {
    let g = generators::gen_blocks(&BlockSpec {
        classes: 2,
        blocks_per_class: 2,
        naturals_per_block: 1,
        augmentations_per_natural: 2,
        cross_block_mass: 0.1,
        cross_class_mass: 0.02,
        seed: 1,
    })?;
    println!("graph: {} vertices in 4 blocks (2 classes x 2)", g.len());

    // Singleton conductance differs between conventions: the literal one
    // keeps the self-loop in the denominator.
    let phi_lit = conductance(&g, &[0], SelfLoops::Include)?;
    let phi_ex = conductance(&g, &[0], SelfLoops::Exclude)?;
    println!("singleton conductance: literal {phi_lit:.4}, zero-self-loop {phi_ex:.4}");

    println!("sparsest m-partitions (literal convention):");
    for m in 2..=6 {
        let res = sparsest_m_partition(&g, m, SelfLoops::Include)?;
        println!(
            "  rho_{m} = {:.6}  (examined {} partitions, best: {:?})",
            res.rho, res.enumeration_count, res.best_partition
        );
    }
    let n = g.len();
    let rho_n = sparsest_m_partition(&g, n, SelfLoops::Exclude)?.rho;
    println!("rho_N without self-loops = {rho_n} (always 1)");

    let (alpha, bayes) = bayes_alpha(&g);
    println!("recoverability error alpha = {alpha:.6}");
    println!(
        "phi of the Bayes labeling  = {:.6} (at most 2 alpha)",
        phi_hat(&g, &bayes)
    );
    println!(
        "Delta of the Bayes labeling = {:.6} (equals alpha)",
        delta_mismatch(&g, &bayes)
    );
    Ok(())
}
