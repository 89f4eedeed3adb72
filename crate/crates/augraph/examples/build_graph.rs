//! Construct an exact augmentation graph by hand, inspect its weights, and
//! round-trip it through the file format.
//!
//! Run with `cargo run --example build_graph`.

use augraph::graph::{
    deserialize_graph, graph_digest, serialize_graph, AugmentationGraph, AugmentationKernel,
    NaturalDistribution,
};

fn main() -> augraph::Result<()> {
    // Two natural points in different classes, each augmented uniformly
    // into its own pair of vertices.
    let dist = NaturalDistribution::new(vec![("a".into(), 0.5, 1), ("b".into(), 0.5, 2)], 2)?;
    let kernel = AugmentationKernel::new(vec![
        ("a".into(), vec![("x1".into(), 0.5), ("x2".into(), 0.5)]),
        ("b".into(), vec![("x3".into(), 0.5), ("x4".into(), 0.5)]),
    ])?;
    let g = AugmentationGraph::build(&dist, &kernel)?;

    println!("vertices: {:?}", g.vertex_ids());
    println!("total pair weight: {}", g.total_weight());
    println!("pair weights:");
    for i in 0..g.len() {
        let row: Vec<String> = (0..g.len())
            .map(|j| format!("{:7.4}", g.pair_weights()[(i, j)]))
            .collect();
        println!("  {} | {}", g.vertex_ids()[i], row.join(" "));
    }
    println!("vertex weights: {:?}", g.vertex_weights().as_slice());

    let m = g.normalized_matrices();
    println!("normalized adjacency (two disconnected 1/2-blocks):");
    for i in 0..g.len() {
        let row: Vec<String> = (0..g.len())
            .map(|j| format!("{:5.2}", m.adjacency()[(i, j)]))
            .collect();
        println!("  {}", row.join(" "));
    }

    let bytes = serialize_graph(&g)?;
    let g2 = deserialize_graph(&bytes)?;
    println!(
        "file round trip: {} bytes, digest {}, weights identical: {}",
        bytes.len(),
        &graph_digest(&bytes)[..16],
        g2.pair_weights() == g.pair_weights()
    );
    Ok(())
}
