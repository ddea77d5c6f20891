//! Closed-form regularized least squares solvers.
//!
//! NHKRLS and LapRLS share one linear system and differ only in the manifold
//! matrix: `(I - P^s)^T (I - P^s)` for NHKRLS, the graph Laplacian `D - W`
//! for LapRLS. With `l` labelled and `n` total samples, `J` the diagonal
//! labelled-indicator and `Y` the zero-padded labels,
//!
//! ```text
//! (J K + gamma_A l I + gamma_I l / n^2 · M K) alpha = Y
//! ```
//!
//! and the classifier is `f(x) = sum_i alpha_i k(x_i, x)`.

use log::warn;
use nalgebra::{DMatrix, DVector, LU, SVD};
use serde::{Deserialize, Serialize};

use crate::datasets::{LabeledDataset, Point};
use crate::diffusion::{check_epsilon, gaussian, KernelMatrix, TransitionMatrix};
use crate::error::{Error, Result};
use crate::metricspace::euclidean;

/// Systems whose 1-norm condition estimate exceeds this are reported as
/// ill-conditioned.
pub const MAX_CONDITION: f64 = 1e12;

/// Which distance drives the diffusion transition matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionMetric {
    Geodesic,
    Euclidean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Weight of the RKHS norm `alpha^T K alpha`.
    pub gamma_a: f64,
    /// Weight of the manifold penalty.
    pub gamma_i: f64,
    /// Kernel bandwidth shared by `K` and the diffusion kernel. `None` picks
    /// the median of squared pairwise distances.
    pub epsilon: Option<f64>,
    /// Diffusion steps `t`, used both for propagation and for `P^s`.
    pub diffusion_steps: usize,
    pub knn_k: usize,
    /// Propagated values with `|u| >= tau` become labels.
    pub tau: f64,
    /// Diagonal shift tried once when the system is ill-conditioned.
    pub ridge_jitter: f64,
    /// `P` applications per diffusion step; `None` means `round(1 / epsilon)`.
    pub steps_per_unit: Option<usize>,
    pub diffusion_metric: DiffusionMetric,
    /// Floyd–Warshall intermediates; `None` relaxes through all `n`.
    pub fw_passes: Option<usize>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            gamma_a: 0.00025,
            gamma_i: 0.925,
            epsilon: None,
            diffusion_steps: 1,
            knn_k: 10,
            tau: 1e-4,
            ridge_jitter: 0.0,
            steps_per_unit: None,
            diffusion_metric: DiffusionMetric::Geodesic,
            fw_passes: None,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.gamma_a > 0.0 && self.gamma_a.is_finite()) {
            return Err(Error::invalid(format!(
                "gamma_a must be > 0, got {}",
                self.gamma_a
            )));
        }
        if !finite_nonneg(self.gamma_i) {
            return Err(Error::invalid(format!(
                "gamma_i must be >= 0, got {}",
                self.gamma_i
            )));
        }
        if let Some(eps) = self.epsilon {
            check_epsilon(eps)?;
        }
        if self.diffusion_steps == 0 {
            return Err(Error::invalid("diffusion_steps must be >= 1"));
        }
        if self.knn_k == 0 {
            return Err(Error::invalid("knn_k must be >= 1"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if !finite_nonneg(self.ridge_jitter) {
            return Err(Error::invalid("ridge_jitter must be >= 0"));
        }
        if self.steps_per_unit == Some(0) {
            return Err(Error::invalid("steps_per_unit must be >= 1"));
        }
        if self.fw_passes == Some(0) {
            return Err(Error::invalid("fw_passes must be >= 1"));
        }
        Ok(())
    }
}

/// `f(x) = sum_i alpha_i exp(-|x_i - x|^2 / epsilon)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    pub alpha: Vec<f64>,
    pub support: Vec<Vec<f64>>,
    pub epsilon: f64,
}

/// `f(x) = w^T x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Classifier {
    Kernel(KernelExpansion),
    Linear(LinearModel),
}

impl Classifier {
    pub fn dim(&self) -> usize {
        match self {
            Classifier::Kernel(k) => k.support.first().map_or(0, Vec::len),
            Classifier::Linear(l) => l.w.len(),
        }
    }

    pub fn alpha(&self) -> Option<&[f64]> {
        match self {
            Classifier::Kernel(k) => Some(&k.alpha),
            Classifier::Linear(_) => None,
        }
    }

    /// Raw decision value at `x`.
    pub fn predict(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "point has dimension {}, classifier expects {}",
                x.dim(),
                self.dim()
            )));
        }
        Ok(self.decision(x.coords()))
    }

    /// `+1` when the decision value is `>= 0`, else `-1`.
    pub fn predict_sign(&self, x: &Point) -> Result<f64> {
        self.predict(x).map(sign)
    }

    pub fn predict_many(&self, xs: &[Point]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    fn decision(&self, x: &[f64]) -> f64 {
        match self {
            Classifier::Kernel(k) => k
                .alpha
                .iter()
                .zip(&k.support)
                .map(|(a, s)| a * gaussian(euclidean(s, x), k.epsilon))
                .sum(),
            Classifier::Linear(l) => l.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + l.b,
        }
    }
}

/// Sign with the tie rule `0 -> +1`.
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `(I - Q)^T (I - Q)` with `Q = P^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyMatrix {
    m: DMatrix<f64>,
    power: usize,
}

impl PenaltyMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn power(&self) -> usize {
        self.power
    }
}

/// Integer matrix power by repeated squaring.
pub fn matrix_power(p: &DMatrix<f64>, mut exp: usize) -> DMatrix<f64> {
    let n = p.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = p.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    result
}

/// NHK penalty for `t` diffusion steps: `s = t · steps_per_unit`.
pub fn nhk_penalty_matrix(p: &TransitionMatrix, t: usize) -> Result<PenaltyMatrix> {
    if t == 0 {
        return Err(Error::invalid("diffusion steps must be >= 1"));
    }
    let power = t * p.steps_per_unit();
    let n = p.n();
    let b = DMatrix::identity(n, n) - matrix_power(p.matrix(), power);
    let m = b.tr_mul(&b);
    let m = (&m + m.transpose()) * 0.5;
    Ok(PenaltyMatrix { m, power })
}

/// Unnormalized graph Laplacian `D - W`, `D` the diagonal of row sums.
pub fn graph_laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut l = -w.clone();
    for i in 0..n {
        let degree: f64 = w.row(i).sum();
        l[(i, i)] += degree;
    }
    l
}

/// Solution of the shared system together with the condition estimate.
#[derive(Clone, Debug)]
pub struct Solve {
    pub alpha: DVector<f64>,
    pub condition: f64,
    pub jitter_used: f64,
}

fn check_fit_inputs(
    ds: &LabeledDataset,
    k: &KernelMatrix,
    manifold: &DMatrix<f64>,
) -> Result<usize> {
    let n = ds.len();
    let l = ds.num_labeled();
    if l == 0 {
        return Err(Error::invalid("at least one labelled sample is required"));
    }
    if k.n() != n || manifold.nrows() != n || manifold.ncols() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: {n} samples, kernel {}x{}, manifold {}x{}",
            k.n(),
            k.n(),
            manifold.nrows(),
            manifold.ncols()
        )));
    }
    Ok(l)
}

/// Builds `A = J K + gamma_A l I + (gamma_I l / n^2) M K` and `Y`.
pub fn normal_system(
    ds: &LabeledDataset,
    k: &KernelMatrix,
    manifold: &DMatrix<f64>,
    params: &ModelParams,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let l = check_fit_inputs(ds, k, manifold)?;
    let n = ds.len();
    let km = k.matrix();
    let lf = l as f64;
    let c = params.gamma_i * lf / (n as f64 * n as f64);

    let mut a = if c != 0.0 {
        manifold * km * c
    } else {
        DMatrix::zeros(n, n)
    };
    for (i, &y) in ds.labels().iter().enumerate() {
        if y != 0.0 {
            let mut row = a.row_mut(i);
            row += km.row(i);
        }
    }
    for i in 0..n {
        a[(i, i)] += params.gamma_a * lf;
    }
    let y = DVector::from_column_slice(ds.labels());
    Ok((a, y))
}

/// Hager–Higham estimate of `|A^{-1}|_1` from LU factors of `A` and `A^T`.
fn inverse_norm1_estimate(
    lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
) -> Option<f64> {
    let n = lu.l().nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for iter in 0..5 {
        let y = lu.solve(&x)?;
        est = y.lp_norm(1);
        let xi = y.map(sign);
        let z = lu_t.solve(&xi)?;
        let (jmax, zmax) = z.iamax_full_pair();
        if iter > 0 && zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    Some(est)
}

trait IamaxPair {
    fn iamax_full_pair(&self) -> (usize, f64);
}

impl IamaxPair for DVector<f64> {
    fn iamax_full_pair(&self) -> (usize, f64) {
        let j = self.iamax();
        (j, self[j].abs())
    }
}

fn solve_once(a: &DMatrix<f64>, y: &DVector<f64>) -> (Option<DVector<f64>>, f64) {
    let lu = a.clone().lu();
    if !lu.is_invertible() {
        return (None, f64::INFINITY);
    }
    let lu_t = a.transpose().lu();
    let norm_a = a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max);
    let condition = match inverse_norm1_estimate(&lu, &lu_t) {
        Some(inv) => norm_a * inv,
        None => f64::INFINITY,
    };
    let alpha = lu.solve(y).filter(|v| v.iter().all(|x| x.is_finite()));
    (alpha, condition)
}

/// Dense LU solve with a condition check. On ill-conditioning the system is
/// retried once with `ridge_jitter · I` added, if that is nonzero.
pub fn solve_system(a: &DMatrix<f64>, y: &DVector<f64>, ridge_jitter: f64) -> Result<Solve> {
    let (alpha, condition) = solve_once(a, y);
    match alpha {
        Some(alpha) if condition <= MAX_CONDITION => {
            return Ok(Solve {
                alpha,
                condition,
                jitter_used: 0.0,
            })
        }
        _ => {}
    }
    if ridge_jitter > 0.0 {
        warn!(
            "system ill-conditioned (condition estimate {condition:.3e}); retrying with jitter {ridge_jitter:e}"
        );
        let n = a.nrows();
        let shifted = a + DMatrix::<f64>::identity(n, n) * ridge_jitter;
        let (alpha, cond2) = solve_once(&shifted, y);
        if let Some(alpha) = alpha {
            if cond2 <= MAX_CONDITION {
                return Ok(Solve {
                    alpha,
                    condition: cond2,
                    jitter_used: ridge_jitter,
                });
            }
        }
        return Err(Error::Numerical {
            message: "system remains ill-conditioned after jitter".into(),
            condition: cond2,
        });
    }
    Err(Error::Numerical {
        message: "ill-conditioned or singular system".into(),
        condition,
    })
}

fn kernel_classifier(ds: &LabeledDataset, k: &KernelMatrix, alpha: DVector<f64>) -> Classifier {
    Classifier::Kernel(KernelExpansion {
        alpha: alpha.as_slice().to_vec(),
        support: ds.points().iter().map(|p| p.coords().to_vec()).collect(),
        epsilon: k.epsilon(),
    })
}

/// Solves the shared system for an arbitrary manifold matrix.
pub fn fit_with_manifold(
    ds: &LabeledDataset,
    k: &KernelMatrix,
    manifold: &DMatrix<f64>,
    params: &ModelParams,
) -> Result<(Classifier, Solve)> {
    params.validate()?;
    let (a, y) = normal_system(ds, k, manifold, params)?;
    let solve = solve_system(&a, &y, params.ridge_jitter)?;
    Ok((kernel_classifier(ds, k, solve.alpha.clone()), solve))
}

/// NHKRLS with the penalty `M = (I - P^s)^T (I - P^s)`.
pub fn nhkrls_fit(
    ds: &LabeledDataset,
    k: &KernelMatrix,
    m: &PenaltyMatrix,
    params: &ModelParams,
) -> Result<Classifier> {
    fit_with_manifold(ds, k, m.matrix(), params).map(|(c, _)| c)
}

/// LapRLS with `L = D - W` built from the adjacency weights `w`.
pub fn laprls_fit(
    ds: &LabeledDataset,
    k: &KernelMatrix,
    w: &DMatrix<f64>,
    params: &ModelParams,
) -> Result<Classifier> {
    if !w.is_square() || w.nrows() != ds.len() {
        return Err(Error::invalid("adjacency weights must be n x n"));
    }
    fit_with_manifold(ds, k, &graph_laplacian(w), params).map(|(c, _)| c)
}

/// Ordinary least squares on the labelled samples with an unpenalized
/// intercept; the minimum-norm `w` is used when the system is
/// underdetermined.
pub fn ls_fit(ds: &LabeledDataset) -> Result<Classifier> {
    let idx = ds.labeled_indices();
    if idx.is_empty() {
        return Err(Error::invalid("at least one labelled sample is required"));
    }
    let dim = ds.dim();
    let l = idx.len();
    let mut mean_x = vec![0.0; dim];
    for &i in &idx {
        for (m, v) in mean_x.iter_mut().zip(ds.points()[i].coords()) {
            *m += v;
        }
    }
    mean_x.iter_mut().for_each(|m| *m /= l as f64);
    let mean_y = idx.iter().map(|&i| ds.labels()[i]).sum::<f64>() / l as f64;

    let x = DMatrix::from_fn(l, dim, |r, c| ds.points()[idx[r]].coords()[c] - mean_x[c]);
    let y = DVector::from_fn(l, |r, _| ds.labels()[idx[r]] - mean_y);

    let w = if x.iter().all(|&v| v == 0.0) {
        DVector::zeros(dim)
    } else {
        let svd = SVD::new(x, true, true);
        let smax = svd.singular_values.max();
        let tol = smax * l.max(dim) as f64 * f64::EPSILON;
        svd.solve(&y, tol).map_err(|e| Error::Numerical {
            message: format!("least squares SVD solve failed: {e}"),
            condition: f64::INFINITY,
        })?
    };
    let b = mean_y - w.iter().zip(&mean_x).map(|(w, m)| w * m).sum::<f64>();
    Ok(Classifier::Linear(LinearModel {
        w: w.as_slice().to_vec(),
        b,
    }))
}
