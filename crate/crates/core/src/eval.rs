//! Error rates, labelled-count sweeps and decision-boundary sampling.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::{label_k_per_class, LabeledDataset, Point};
use crate::error::{Error, Result};
use crate::pipeline::{train, ModelKind};
use crate::solvers::{sign, Classifier, ModelParams};

/// Doubling schedule 2, 4, ..., 256.
pub const DEFAULT_COUNTS: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];

/// Fraction of positions where `predictions` and `truths` differ.
pub fn error_rate(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::invalid("error rate of an empty prediction set"));
    }
    if predictions.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let wrong = predictions
        .iter()
        .zip(truths)
        .filter(|(p, t)| p != t)
        .count();
    Ok(wrong as f64 / predictions.len() as f64)
}

/// Signs of `c` on every point.
pub fn predict_signs(c: &Classifier, points: &[Point]) -> Result<Vec<f64>> {
    points.iter().map(|p| c.predict(p).map(sign)).collect()
}

/// Training pool (true classes in `classes`, labels ignored) plus the points
/// the error is measured on. Pass the training points themselves for
/// transductive evaluation.
#[derive(Clone, Copy, Debug)]
pub struct SweepTask<'a> {
    pub train: &'a LabeledDataset,
    pub positive_class: usize,
    pub test_points: &'a [Point],
    /// `+1` / `-1` ground truth for `test_points`.
    pub test_truths: &'a [f64],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: ModelKind,
    pub count: usize,
    pub trial: usize,
    pub error: f64,
    /// Wall time of training plus prediction; `None` unless timing was
    /// requested, so that default output is reproducible.
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with header `model,count,trial,error,seconds`; missing timings are
    /// empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,count,trial,error,seconds\n");
        for r in &self.rows {
            let secs = r.seconds.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.model, r.count, r.trial, r.error, secs
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep rows are always serializable")
    }

    /// Mean error over trials for one `(model, count)` cell.
    pub fn mean_error(&self, model: ModelKind, count: usize) -> Option<f64> {
        let errs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.model == model && r.count == count)
            .map(|r| r.error)
            .collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    }
}

/// Seed for one `(count, trial)` cell; all models in a cell share labels.
pub fn cell_seed(seed: u64, count: usize, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((count as u64) << 32) ^ trial as u64
}

/// For every count and trial, labels `count` samples per side with
/// [`label_k_per_class`], trains each model on the same labels and records
/// its error on the test points. Rows are ordered by count, trial, model.
pub fn sweep_labeled_counts(
    task: SweepTask<'_>,
    models: &[ModelKind],
    counts: &[usize],
    trials: usize,
    seed: u64,
    params: &ModelParams,
    record_timings: bool,
) -> Result<SweepResult> {
    params.validate()?;
    if counts.is_empty() || models.is_empty() || trials == 0 {
        return Err(Error::invalid(
            "sweep needs at least one count, model and trial",
        ));
    }
    if task.test_points.len() != task.test_truths.len() || task.test_points.is_empty() {
        return Err(Error::invalid(
            "test points and truths must be nonempty and equal length",
        ));
    }
    let classes = task.train.classes();
    let positives = classes
        .iter()
        .filter(|&&c| c == task.positive_class)
        .count();
    let negatives = classes.len() - positives;
    if let Some(&bad) = counts
        .iter()
        .find(|&&c| c == 0 || c > positives.min(negatives))
    {
        return Err(Error::invalid(format!(
            "count {bad} infeasible: {positives} positive and {negatives} negative samples"
        )));
    }

    let cells: Vec<(usize, usize)> = counts
        .iter()
        .flat_map(|&c| (0..trials).map(move |t| (c, t)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(count, trial)| {
            let labeled = label_k_per_class(
                task.train,
                classes,
                count,
                task.positive_class,
                cell_seed(seed, count, trial),
            )?;
            models
                .iter()
                .map(|&model| {
                    let start = Instant::now();
                    let report = train(&labeled, model, params)?;
                    let preds = predict_signs(&report.classifier, task.test_points)?;
                    let error = error_rate(&preds, task.test_truths)?;
                    let elapsed = start.elapsed().as_secs_f64();
                    Ok(SweepRow {
                        model,
                        count,
                        trial,
                        error,
                        seconds: record_timings.then_some(elapsed),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows: per_cell.into_iter().flatten().collect(),
    })
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of 2-D points, padded by `margin` on every side.
    pub fn around(points: &[Point], margin: f64) -> Result<Self> {
        if points.is_empty() || points.iter().any(|p| p.dim() != 2) {
            return Err(Error::invalid("bounds need nonempty 2-D points"));
        }
        let mut b = Bounds {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in points {
            let c = p.coords();
            b.x_min = b.x_min.min(c[0]);
            b.x_max = b.x_max.max(c[0]);
            b.y_min = b.y_min.min(c[1]);
            b.y_max = b.y_max.max(c[1]);
        }
        b.x_min -= margin;
        b.x_max += margin;
        b.y_min -= margin;
        b.y_max += margin;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid bounds {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub bounds: Bounds,
    pub points: Vec<[f64; 2]>,
    pub signs: Vec<f64>,
}

impl BoundaryGrid {
    /// CSV with header `x1,x2,sign`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,sign\n");
        for (p, s) in self.points.iter().zip(&self.signs) {
            let _ = writeln!(out, "{},{},{}", p[0], p[1], s);
        }
        out
    }
}

/// Classifies `n_samples` uniform random points in `bounds`.
pub fn boundary_grid(
    c: &Classifier,
    bounds: Bounds,
    n_samples: usize,
    seed: u64,
) -> Result<BoundaryGrid> {
    if c.dim() != 2 {
        return Err(Error::invalid(format!(
            "boundary sampling needs a 2-D classifier, got dimension {}",
            c.dim()
        )));
    }
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 2]> = (0..n_samples)
        .map(|_| {
            [
                rng.random_range(bounds.x_min..bounds.x_max),
                rng.random_range(bounds.y_min..bounds.y_max),
            ]
        })
        .collect();
    let signs = points
        .par_iter()
        .map(|p| c.predict_sign(&Point::new(p.to_vec())))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryGrid {
        bounds,
        points,
        signs,
    })
}
