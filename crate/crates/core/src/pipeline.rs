//! End-to-end training: distances, kernel, geometry, propagation, penalty and
//! solve, for each of the three models.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::datasets::LabeledDataset;
use crate::diffusion::{
    default_steps_per_unit, gaussian_kernel_matrix, median_epsilon, propagate, relabel_dataset,
    transition_matrix, KernelMatrix, PropagationState, TransitionMatrix,
};
use crate::error::{Error, Result};
use crate::metricspace::{
    floyd_warshall, floyd_warshall_matrix_form, knn_graph, pairwise_distances, DistanceMatrix,
    KnnGraph,
};
use crate::solvers::{
    fit_with_manifold, graph_laplacian, ls_fit, nhk_penalty_matrix, Classifier, DiffusionMetric,
    ModelParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nhkrls,
    Laprls,
    Ls,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Nhkrls, ModelKind::Laprls, ModelKind::Ls];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Nhkrls => "nhkrls",
            ModelKind::Laprls => "laprls",
            ModelKind::Ls => "ls",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nhkrls" => Ok(ModelKind::Nhkrls),
            "laprls" => Ok(ModelKind::Laprls),
            "ls" => Ok(ModelKind::Ls),
            other => Err(Error::invalid(format!(
                "unknown model {other:?} (expected nhkrls, laprls or ls)"
            ))),
        }
    }
}

/// Euclidean geometry shared by every kernel model.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub distances: DistanceMatrix,
    pub epsilon: f64,
    pub kernel: KernelMatrix,
    pub graph: KnnGraph,
}

/// Pairwise distances, bandwidth (explicit or median rule), Gaussian kernel
/// and k-NN graph.
pub fn geometry(ds: &LabeledDataset, params: &ModelParams) -> Result<Geometry> {
    params.validate()?;
    let distances = pairwise_distances(ds.points())?;
    let epsilon = match params.epsilon {
        Some(eps) => eps,
        None => median_epsilon(&distances)?,
    };
    let kernel = gaussian_kernel_matrix(&distances, epsilon)?;
    let graph = knn_graph(&distances, params.knn_k)?;
    Ok(Geometry {
        distances,
        epsilon,
        kernel,
        graph,
    })
}

/// Shortest-path distances through the k-NN graph.
pub fn geodesic_distances(graph: &KnnGraph, passes: Option<usize>) -> Result<DistanceMatrix> {
    match passes {
        None => Ok(floyd_warshall(graph)),
        Some(p) => floyd_warshall_matrix_form(graph, p),
    }
}

/// The diffusion transition matrix selected by `params.diffusion_metric`.
pub fn diffusion_transition(geo: &Geometry, params: &ModelParams) -> Result<TransitionMatrix> {
    let kernel = match params.diffusion_metric {
        DiffusionMetric::Geodesic => {
            let g = geodesic_distances(&geo.graph, params.fw_passes)?;
            gaussian_kernel_matrix(&g, geo.epsilon)?
        }
        DiffusionMetric::Euclidean => geo.kernel.clone(),
    };
    let m = params
        .steps_per_unit
        .unwrap_or_else(|| default_steps_per_unit(geo.epsilon));
    transition_matrix(&kernel)?.with_steps_per_unit(m)
}

/// LapRLS adjacency: the Gaussian kernel on k-NN edges, zero elsewhere and on
/// the diagonal.
pub fn knn_kernel_weights(geo: &Geometry) -> DMatrix<f64> {
    let n = geo.graph.n();
    DMatrix::from_fn(n, n, |i, j| {
        if i != j && geo.graph.has_edge(i, j) {
            geo.kernel.matrix()[(i, j)]
        } else {
            0.0
        }
    })
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub model: ModelKind,
    pub classifier: Classifier,
    /// Kernel bandwidth used (`None` for LS).
    pub epsilon: Option<f64>,
    pub labeled_before: usize,
    /// Labelled count entering the solve (after propagation for NHKRLS).
    pub labeled_after: usize,
    pub condition: Option<f64>,
}

/// Trains `model` on `ds`.
///
/// NHKRLS propagates the labels for `diffusion_steps` steps, relabels points
/// with `|u| >= tau`, and solves with the NHK penalty of the same number of
/// steps. LapRLS solves with the Laplacian of [`knn_kernel_weights`]. LS fits
/// a linear model on the labelled points only.
pub fn train(ds: &LabeledDataset, model: ModelKind, params: &ModelParams) -> Result<TrainReport> {
    params.validate()?;
    let labeled_before = ds.num_labeled();
    if labeled_before == 0 {
        return Err(Error::invalid("at least one labelled sample is required"));
    }
    match model {
        ModelKind::Ls => Ok(TrainReport {
            model,
            classifier: ls_fit(ds)?,
            epsilon: None,
            labeled_before,
            labeled_after: labeled_before,
            condition: None,
        }),
        ModelKind::Laprls => {
            let geo = geometry(ds, params)?;
            let l = graph_laplacian(&knn_kernel_weights(&geo));
            let (classifier, solve) = fit_with_manifold(ds, &geo.kernel, &l, params)?;
            Ok(TrainReport {
                model,
                classifier,
                epsilon: Some(geo.epsilon),
                labeled_before,
                labeled_after: labeled_before,
                condition: Some(solve.condition),
            })
        }
        ModelKind::Nhkrls => {
            let geo = geometry(ds, params)?;
            let p = diffusion_transition(&geo, params)?;
            let state = propagate(
                &p,
                &PropagationState::from_dataset(ds),
                params.diffusion_steps,
            )?;
            let relabeled = relabel_dataset(ds, &state, params.tau)?;
            let m = nhk_penalty_matrix(&p, params.diffusion_steps)?;
            let (classifier, solve) =
                fit_with_manifold(&relabeled, &geo.kernel, m.matrix(), params)?;
            Ok(TrainReport {
                model,
                classifier,
                epsilon: Some(geo.epsilon),
                labeled_before,
                labeled_after: relabeled.num_labeled(),
                condition: Some(solve.condition),
            })
        }
    }
}
