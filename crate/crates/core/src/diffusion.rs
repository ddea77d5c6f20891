//! Gaussian kernels, diffusion-map transition matrices and clamped label
//! propagation.

use nalgebra::{DMatrix, DVector};

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};
use crate::metricspace::{DistanceMatrix, Metric};

/// `K(i, j) = exp(-d(i, j)^2 / epsilon)`; pairs at infinite distance get 0.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    k: DMatrix<f64>,
    epsilon: f64,
    metric: Metric,
}

impl KernelMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    Ok(())
}

pub fn gaussian(d: f64, epsilon: f64) -> f64 {
    (-(d * d) / epsilon).exp()
}

pub fn gaussian_kernel_matrix(d: &DistanceMatrix, epsilon: f64) -> Result<KernelMatrix> {
    check_epsilon(epsilon)?;
    Ok(KernelMatrix {
        k: d.matrix().map(|v| gaussian(v, epsilon)),
        epsilon,
        metric: d.metric(),
    })
}

/// Median of the finite off-diagonal squared distances.
///
/// Duplicate points can push the median to zero; in that case the median of
/// the strictly positive squared distances is returned instead.
pub fn median_epsilon(d: &DistanceMatrix) -> Result<f64> {
    if d.n() < 2 {
        return Err(Error::invalid("median_epsilon needs at least two points"));
    }
    let mut sq: Vec<f64> = d
        .upper_entries()
        .filter(|v| v.is_finite())
        .map(|v| v * v)
        .collect();
    sq.sort_by(f64::total_cmp);
    let med = median_sorted(&sq);
    if med > 0.0 {
        return Ok(med);
    }
    let positive: Vec<f64> = sq.into_iter().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::DegenerateInput(
            "all pairwise distances are zero".into(),
        ));
    }
    Ok(median_sorted(&positive))
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Default number of `P` applications per diffusion step: the integer
/// realization of the exponent `1 / epsilon`.
pub fn default_steps_per_unit(epsilon: f64) -> usize {
    (1.0 / epsilon).round().max(1.0) as usize
}

/// Row-stochastic diffusion matrix `P(i, j) = K(i, j) / sum_j K(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
    steps_per_unit: usize,
}

impl TransitionMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn with_steps_per_unit(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("steps_per_unit must be >= 1"));
        }
        self.steps_per_unit = m;
        Ok(self)
    }

    /// Single application `P v`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.p * v
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_sum_error(&self) -> f64 {
        self.p
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Wraps a matrix that is already row-stochastic (checked to 1e-12).
    pub fn from_matrix(p: DMatrix<f64>, steps_per_unit: usize) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::invalid("transition matrix must be square"));
        }
        if steps_per_unit == 0 {
            return Err(Error::invalid("steps_per_unit must be >= 1"));
        }
        // Written negated so NaN entries are rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if p.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::invalid(
                "transition matrix has negative or NaN entries",
            ));
        }
        let tm = TransitionMatrix { p, steps_per_unit };
        if tm.max_row_sum_error() > 1e-12 {
            return Err(Error::invalid("transition matrix rows do not sum to 1"));
        }
        Ok(tm)
    }
}

pub fn transition_matrix(k: &KernelMatrix) -> Result<TransitionMatrix> {
    let mut p = k.k.clone();
    for (i, mut row) in p.row_iter_mut().enumerate() {
        let degree: f64 = row.sum();
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(degree > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "row {i} of the kernel sums to zero"
            )));
        }
        row /= degree;
    }
    Ok(TransitionMatrix {
        p,
        steps_per_unit: default_steps_per_unit(k.epsilon),
    })
}

/// Label field `u(·, t)` with the indices whose values stay fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationState {
    u: DVector<f64>,
    clamp_idx: Vec<usize>,
    clamp_values: Vec<f64>,
    t: usize,
}

impl PropagationState {
    /// Zero field with `clamp_values[j]` pinned at `clamp_idx[j]`.
    pub fn new(n: usize, clamp_idx: Vec<usize>, clamp_values: Vec<f64>) -> Result<Self> {
        if clamp_idx.len() != clamp_values.len() {
            return Err(Error::invalid("clamp indices and values differ in length"));
        }
        if let Some(&i) = clamp_idx.iter().find(|&&i| i >= n) {
            return Err(Error::invalid(format!(
                "clamp index {i} out of range for {n} points"
            )));
        }
        if let Some(v) = clamp_values.iter().find(|v| v.abs() != 1.0) {
            return Err(Error::invalid(format!("clamp value {v} is not +-1")));
        }
        let mut u = DVector::zeros(n);
        for (&i, &v) in clamp_idx.iter().zip(&clamp_values) {
            u[i] = v;
        }
        Ok(PropagationState {
            u,
            clamp_idx,
            clamp_values,
            t: 0,
        })
    }

    /// Clamps every labelled sample of `ds` to its label.
    pub fn from_dataset(ds: &LabeledDataset) -> Self {
        let idx = ds.labeled_indices();
        let values = idx.iter().map(|&i| ds.labels()[i]).collect();
        Self::new(ds.len(), idx, values).expect("dataset labels are valid clamps")
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn values(&self) -> &[f64] {
        self.u.as_slice()
    }

    pub fn clamp_idx(&self) -> &[usize] {
        &self.clamp_idx
    }

    pub fn clamp_values(&self) -> &[f64] {
        &self.clamp_values
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    fn reclamp(&mut self) {
        for (&i, &v) in self.clamp_idx.iter().zip(&self.clamp_values) {
            self.u[i] = v;
        }
    }
}

/// Runs `steps` diffusion steps: each is `steps_per_unit` applications of `P`
/// followed by resetting the clamped entries.
pub fn propagate(
    p: &TransitionMatrix,
    state: &PropagationState,
    steps: usize,
) -> Result<PropagationState> {
    let mut out = state.clone();
    propagate_with(p, &mut out, steps, |_| {})?;
    Ok(out)
}

/// Like [`propagate`] but mutates `state` in place and calls `observe` after
/// every step (used for traces).
pub fn propagate_with(
    p: &TransitionMatrix,
    state: &mut PropagationState,
    steps: usize,
    mut observe: impl FnMut(&PropagationState),
) -> Result<()> {
    if p.n() != state.n() {
        return Err(Error::invalid(format!(
            "transition matrix is {}x{} but state has {} entries",
            p.n(),
            p.n(),
            state.n()
        )));
    }
    if let Some(&i) = state.clamp_idx.iter().find(|&&i| i >= state.n()) {
        return Err(Error::invalid(format!("clamp index {i} out of range")));
    }
    for _ in 0..steps {
        for _ in 0..p.steps_per_unit {
            state.u = p.apply(&state.u);
        }
        state.reclamp();
        state.t += 1;
        observe(state);
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
    }
    Ok(())
}

/// New label vector: clamped indices keep their values, indices with
/// `|u| >= tau` take `sign(u)`, all others are unlabelled.
pub fn relabel_from_propagation(state: &PropagationState, tau: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    let mut labels: Vec<f64> = state
        .u
        .iter()
        .map(|&v| if v.abs() >= tau { v.signum() } else { 0.0 })
        .collect();
    for (&i, &v) in state.clamp_idx.iter().zip(&state.clamp_values) {
        labels[i] = v;
    }
    Ok(labels)
}

/// [`relabel_from_propagation`] applied to a dataset.
pub fn relabel_dataset(
    ds: &LabeledDataset,
    state: &PropagationState,
    tau: f64,
) -> Result<LabeledDataset> {
    if ds.len() != state.n() {
        return Err(Error::invalid("dataset and state sizes differ"));
    }
    ds.with_labels(relabel_from_propagation(state, tau)?)
}

/// Number of uncoloured indices (`|u| <= threshold`) that lie strictly inside
/// the index span of the coloured ones. Zero means the coloured set is one
/// contiguous run.
pub fn contiguity_violations(u: &[f64], threshold: f64) -> usize {
    let colored: Vec<usize> = u
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > threshold)
        .map(|(i, _)| i)
        .collect();
    match (colored.first(), colored.last()) {
        (Some(&lo), Some(&hi)) => (hi - lo + 1) - colored.len(),
        _ => 0,
    }
}
