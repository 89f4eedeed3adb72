//! Build a machine-readable verification report in process: run the bound
//! evaluations on a generated graph and emit the JSON document the CLI's
//! `verify` subcommand writes.
//!
//! Run with `cargo run --example verification_report`.

use augraph::bounds::{bound_b2, BOUND_TOL, CONSTRUCTED_TOL};
use augraph::generators::{self, BlockSpec};
use augraph::graph::{graph_digest, serialize_graph};
use augraph::partition::bayes_alpha;
use augraph::report::{RunManifest, VerificationReport};
use augraph::spectral::SpectralDecomposition;

fn main() -> augraph::Result<()> {
    let g = generators::gen_blocks(&BlockSpec {
        classes: 3,
        blocks_per_class: 1,
        naturals_per_block: 1,
        augmentations_per_natural: 3,
        cross_block_mass: 0.0,
        cross_class_mass: 0.015,
        seed: 12,
    })?;
    let digest = graph_digest(&serialize_graph(&g)?);
    let k = 3;
    let dec = SpectralDecomposition::compute(&g.normalized_matrices(), k)?;
    let (_, yhat) = bayes_alpha(&g);

    let b2 = bound_b2(&g, &dec, &yhat, k, None, 12)?;
    let mut report =
        VerificationReport::new(RunManifest::new("verify", 12, &digest).flag("suite", "b2"));
    report.push(b2.error.to_check_record(BOUND_TOL));
    report.push(b2.quadratic.to_check_record(CONSTRUCTED_TOL));
    report.push(b2.norm.to_check_record(CONSTRUCTED_TOL));

    println!("{}", report.render_table());
    println!("{}", String::from_utf8_lossy(&report.to_json()?));
    Ok(())
}
