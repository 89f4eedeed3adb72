//! # augraph
//!
//! A desk-scale laboratory for augmentation graphs and spectral contrastive
//! learning.
//!
//! The central object is the finite **augmentation graph**: a weighted graph
//! on augmented data points where the edge weight `w[x][x']` is the joint
//! probability that a random natural example is augmented into both `x` and
//! `x'`. Everything else is computed exactly on top of it:
//!
//! - eigendecomposition of the normalized adjacency `Ā = D^{-1/2} A D^{-1/2}`
//!   and Eckart–Young low-rank reference solutions ([`spectral`]),
//! - the spectral contrastive loss, its population/empirical/minibatch forms,
//!   and a SimCLR-style baseline ([`contrastive`]),
//! - gradient-descent trainers, nonparametric and with a small parametric
//!   feature map ([`trainer`]),
//! - linear probes: prediction, augmentation-ensembled prediction, capped
//!   quadratic fitting under a Frobenius-norm budget ([`probe`]),
//! - conductance, exact sparsest m-partitions, Rayleigh quotients, and
//!   eigenspace approximation/projection quantities ([`partition`]),
//! - explicit-constant error bounds compared against measured probe errors
//!   ([`bounds`]),
//! - reproducible synthetic graph families ([`generators`]).
//!
//! ## Quick start
//!
//! ```rust
//! use augraph::graph::{AugmentationGraph, AugmentationKernel, NaturalDistribution};
//!
//! // Two natural points, each with two equally likely augmentations.
//! let dist = NaturalDistribution::new(
//!     vec![("a".into(), 0.5, 1), ("b".into(), 0.5, 2)],
//!     2,
//! ).unwrap();
//! let kernel = AugmentationKernel::new(vec![
//!     ("a".into(), vec![("x1".into(), 0.5), ("x2".into(), 0.5)]),
//!     ("b".into(), vec![("x3".into(), 0.5), ("x4".into(), 0.5)]),
//! ]).unwrap();
//!
//! let g = AugmentationGraph::build(&dist, &kernel).unwrap();
//! assert_eq!(g.len(), 4);
//! assert!((g.total_weight() - 1.0).abs() < 1e-10);
//! ```
//!
//! Each major capability has a runnable example under `examples/`; the thin
//! `augraph` binary wraps the same library calls into reproducible runs with
//! machine-readable reports.

pub mod bounds;
pub mod contrastive;
pub mod decimal;
pub mod error;
pub mod generators;
pub mod graph;
pub mod partition;
pub mod probe;
pub mod report;
pub mod spectral;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{AugmentationGraph, AugmentationKernel, NaturalDistribution, NormalizedMatrices};
pub use spectral::{EmbeddingMatrix, SpectralDecomposition};
