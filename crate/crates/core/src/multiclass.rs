//! One-vs-rest training over ten digit classes with argmax prediction.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datasets::{LabeledDataset, Point};
use crate::error::{Error, Result};
use crate::solvers::Classifier;

pub const NUM_CLASSES: usize = 10;

/// Ten binary classifiers; classifier `i` scores "digit `i`" against the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct OvrModel {
    classifiers: Vec<Classifier>,
}

impl OvrModel {
    pub fn new(classifiers: Vec<Classifier>) -> Result<Self> {
        if classifiers.len() != NUM_CLASSES {
            return Err(Error::invalid(format!(
                "one-vs-rest needs {NUM_CLASSES} classifiers, got {}",
                classifiers.len()
            )));
        }
        let dim = classifiers[0].dim();
        if classifiers.iter().any(|c| c.dim() != dim) {
            return Err(Error::Consistency(
                "classifiers disagree on feature dimension".into(),
            ));
        }
        Ok(OvrModel { classifiers })
    }

    pub fn classifiers(&self) -> &[Classifier] {
        &self.classifiers
    }

    pub fn dim(&self) -> usize {
        self.classifiers[0].dim()
    }

    /// The ten raw decision values at `x`.
    pub fn scores(&self, x: &Point) -> Result<Vec<f64>> {
        self.classifiers.iter().map(|c| c.predict(x)).collect()
    }
}

/// Fits one binary classifier per subset with `fit_fn`. Subset `i` must label
/// digit `i` as `+1`. Fits run in parallel; the result is in digit order.
pub fn ovr_train<F>(subsets: &[LabeledDataset], fit_fn: F) -> Result<OvrModel>
where
    F: Fn(&LabeledDataset) -> Result<Classifier> + Sync,
{
    if subsets.len() != NUM_CLASSES {
        return Err(Error::invalid(format!(
            "one-vs-rest needs {NUM_CLASSES} subsets, got {}",
            subsets.len()
        )));
    }
    let classifiers = subsets
        .par_iter()
        .map(&fit_fn)
        .collect::<Result<Vec<_>>>()?;
    OvrModel::new(classifiers)
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn ovr_predict(m: &OvrModel, x: &Point) -> Result<usize> {
    Ok(argmax(&m.scores(x)?))
}

/// Composition of a one-vs-rest training subset: `positives` samples of the
/// target digit, `per_other` of each other digit except the highest, which
/// contributes `last_other`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsetSizes {
    pub positives: usize,
    pub per_other: usize,
    pub last_other: usize,
}

impl Default for SubsetSizes {
    /// 950 positives and 8 × 105 + 110 = 950 negatives.
    fn default() -> Self {
        SubsetSizes {
            positives: 950,
            per_other: 105,
            last_other: 110,
        }
    }
}

impl SubsetSizes {
    pub fn total(&self) -> usize {
        self.positives + (NUM_CLASSES - 2) * self.per_other + self.last_other
    }
}

/// Draws the ten one-vs-rest subsets (unlabelled, true digits kept as
/// classes) from a pool of digit images, uniformly without replacement.
pub fn build_ovr_subsets(
    points: &[Point],
    digits: &[usize],
    sizes: SubsetSizes,
    seed: u64,
) -> Result<Vec<LabeledDataset>> {
    if points.len() != digits.len() {
        return Err(Error::Consistency(format!(
            "{} points for {} labels",
            points.len(),
            digits.len()
        )));
    }
    let mut by_digit: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, &d) in digits.iter().enumerate() {
        if d >= NUM_CLASSES {
            return Err(Error::invalid(format!("digit {d} out of range")));
        }
        by_digit[d].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subsets = Vec::with_capacity(NUM_CLASSES);
    for target in 0..NUM_CLASSES {
        let others: Vec<usize> = (0..NUM_CLASSES).filter(|&d| d != target).collect();
        let mut chosen = Vec::with_capacity(sizes.total());
        for (d, pool) in by_digit.iter().enumerate() {
            let want = if d == target {
                sizes.positives
            } else if Some(&d) == others.last() {
                sizes.last_other
            } else {
                sizes.per_other
            };
            if pool.len() < want {
                return Err(Error::invalid(format!(
                    "digit {d} has {} samples, subset for digit {target} needs {want}",
                    pool.len()
                )));
            }
            let mut picks: Vec<usize> = index::sample(&mut rng, pool.len(), want)
                .into_iter()
                .map(|j| pool[j])
                .collect();
            picks.sort_unstable();
            chosen.extend(picks);
        }
        let pts = chosen.iter().map(|&i| points[i].clone()).collect();
        let cls = chosen.iter().map(|&i| digits[i]).collect();
        subsets.push(LabeledDataset::unlabeled(pts, cls)?);
    }
    Ok(subsets)
}
