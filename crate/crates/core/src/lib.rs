//! Semi-supervised classification on data manifolds.
//!
//! The pipeline builds a k-nearest-neighbour graph over the samples, turns it
//! into geodesic (shortest path) distances, and uses those distances to form a
//! diffusion-map transition matrix `P`. Labels are propagated by repeated
//! application of `P` with the labelled entries clamped, and the classifier is
//! obtained from a regularized least squares problem whose manifold term is
//! `|(I - P^s) f|^2`, a discrete stand-in for `|f - e^{tΔ} f|^2` with the
//! Neumann heat semigroup.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`datasets`] | synthetic generators, IDX loader, labelled/unlabelled partitions |
//! | [`metricspace`] | distance matrices, k-NN graphs, Floyd–Warshall |
//! | [`diffusion`] | Gaussian kernel, transition matrix, clamped propagation |
//! | [`solvers`] | NHKRLS, LapRLS and LS fits, prediction |
//! | [`multiclass`] | one-vs-rest training and argmax prediction |
//! | [`eval`] | error rates, labelled-count sweeps, decision boundary sampling |
//! | [`cli`] | the `heatreg` command line |

pub mod cli;
pub mod datasets;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod metricspace;
pub mod multiclass;
pub mod pipeline;
pub mod solvers;

pub use datasets::{LabeledDataset, Point};
pub use diffusion::{KernelMatrix, PropagationState, TransitionMatrix};
pub use error::{Error, Result};
pub use metricspace::{DistanceMatrix, KnnGraph, Metric};
pub use solvers::{Classifier, ModelParams, PenaltyMatrix};
