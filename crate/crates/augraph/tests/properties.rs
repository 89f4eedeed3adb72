//! Property tests over arbitrary stochastic inputs: graph construction
//! invariants, the loss-equivalence identity, and the ensembling error
//! inequality.

use nalgebra::DMatrix;
use proptest::prelude::*;

use augraph::contrastive::{loss_constant, population_loss, FeatureTable};
use augraph::graph::{AugmentationGraph, AugmentationKernel, NaturalDistribution};
use augraph::probe::{probe_error, LinearProbe};
use augraph::spectral::mf_loss;

/// Normalize raw positives into a probability vector summing to 1 within
/// the validators' tolerance (residual onto the largest entry).
fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|&x| x / total).collect();
    let s: f64 = probs.iter().sum();
    let argmax = probs
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .unwrap();
    probs[argmax] += 1.0 - s;
    probs
}

/// Strategy: a small random augmentation model (distribution + kernel).
fn arb_model() -> impl Strategy<Value = (NaturalDistribution, AugmentationKernel)> {
    (2usize..5, 3usize..9).prop_flat_map(|(n_nat, n_vert)| {
        let nat_raw = prop::collection::vec(0.05f64..1.0, n_nat);
        let rows_raw = prop::collection::vec(prop::collection::vec(0.05f64..1.0, n_vert), n_nat);
        (nat_raw, rows_raw).prop_map(move |(nat_raw, rows_raw)| {
            let probs = normalize(&nat_raw);
            let items: Vec<(String, f64, usize)> = (0..n_nat)
                .map(|i| (format!("n{i}"), probs[i], 1 + i % 2))
                .collect();
            let rows: Vec<(String, Vec<(String, f64)>)> = rows_raw
                .iter()
                .enumerate()
                .map(|(i, raw)| {
                    let ps = normalize(raw);
                    (
                        format!("n{i}"),
                        (0..n_vert).map(|v| (format!("x{v}"), ps[v])).collect(),
                    )
                })
                .collect();
            (
                NaturalDistribution::new(items, 2).unwrap(),
                AugmentationKernel::new(rows).unwrap(),
            )
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn construction_invariants((dist, kernel) in arb_model()) {
        let g = AugmentationGraph::build(&dist, &kernel).unwrap();
        let n = g.len();
        prop_assert!((g.total_weight() - 1.0).abs() < 1e-10);
        for i in 0..n {
            prop_assert!(g.vertex_weights()[i] > 0.0);
            let row_sum = g.pair_weights().row(i).sum();
            prop_assert!((row_sum - g.vertex_weights()[i]).abs() < 1e-12);
            // Posterior row mass is the vertex marginal.
            let post: f64 = (0..g.num_classes()).map(|c| g.class_posterior()[(i, c)]).sum();
            prop_assert!((post - g.vertex_weights()[i]).abs() < 1e-12);
            for j in 0..n {
                prop_assert_eq!(g.pair_weights()[(i, j)], g.pair_weights()[(j, i)]);
            }
        }
    }

    #[test]
    fn loss_identity(
        (dist, kernel) in arb_model(),
        feat_raw in prop::collection::vec(-2.0f64..2.0, 8 * 3),
    ) {
        let g = AugmentationGraph::build(&dist, &kernel).unwrap();
        let f = FeatureTable::new(DMatrix::from_fn(g.len(), 3, |i, j| {
            feat_raw[(i * 3 + j) % feat_raw.len()]
        })).unwrap();
        let lhs = population_loss(&g, &f).unwrap() + loss_constant(&g);
        let rhs = mf_loss(&g.normalized_matrices(), &f.to_embedding(&g).unwrap()).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() < 1e-9 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn ensembling_at_most_doubles_error(
        (dist, kernel) in arb_model(),
        feat_raw in prop::collection::vec(-2.0f64..2.0, 8 * 2),
        probe_raw in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let g = AugmentationGraph::build(&dist, &kernel).unwrap();
        let f = FeatureTable::new(DMatrix::from_fn(g.len(), 2, |i, j| {
            feat_raw[(i * 2 + j) % feat_raw.len()]
        })).unwrap();
        let b = LinearProbe::new(
            DMatrix::from_fn(2, 2, |i, j| probe_raw[i * 2 + j]),
            None,
        ).unwrap();
        let report = probe_error(&f, &b, &g).unwrap();
        prop_assert!(report.ensemble_error <= 2.0 * report.augmented_error + 1e-12);
        prop_assert!(report.augmented_error <= 2.0 * report.capped_loss + 1e-12);
        prop_assert!(report.augmented_error <= 1.0 && report.ensemble_error <= 1.0);
    }
}
