//! Sample containers, synthetic generators, the IDX loader and label sampling.

mod idx;
mod synthetic;
mod table;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels};
pub use synthetic::{generate_ring, generate_spiral, generate_two_clusters, generate_two_moons};
pub use table::{dataset_to_csv_string, read_dataset_csv, write_dataset_csv};

/// A single sample. Images are stored flattened row-major, so the Frobenius
/// distance between two images is the Euclidean distance between points.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Points with their semi-supervised labels and ground-truth classes.
///
/// `labels[i]` is `+1`/`-1` for labelled samples and `0` for unlabelled ones;
/// the labelled and unlabelled index sets are derived from it, so they always
/// partition `0..len()`. `classes` holds the generator's (or file's) ground
/// truth and is never read by the training code.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    points: Vec<Point>,
    labels: Vec<f64>,
    classes: Vec<usize>,
}

impl LabeledDataset {
    /// All samples start unlabelled.
    pub fn unlabeled(points: Vec<Point>, classes: Vec<usize>) -> Result<Self> {
        let labels = vec![0.0; points.len()];
        Self::new(points, labels, classes)
    }

    pub fn new(points: Vec<Point>, labels: Vec<f64>, classes: Vec<usize>) -> Result<Self> {
        if points.len() != labels.len() || points.len() != classes.len() {
            return Err(Error::Consistency(format!(
                "{} points, {} labels, {} classes",
                points.len(),
                labels.len(),
                classes.len()
            )));
        }
        if let Some(first) = points.first() {
            let dim = first.dim();
            if let Some(i) = points.iter().position(|p| p.dim() != dim) {
                return Err(Error::invalid(format!(
                    "point {i} has dimension {}, expected {dim}",
                    points[i].dim()
                )));
            }
        }
        if let Some(i) = points
            .iter()
            .position(|p| p.coords().iter().any(|v| !v.is_finite()))
        {
            return Err(Error::invalid(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        if let Some(i) = labels
            .iter()
            .position(|&y| y != 0.0 && y != 1.0 && y != -1.0)
        {
            return Err(Error::invalid(format!(
                "label {} at index {i} is not in {{-1, 0, +1}}",
                labels[i]
            )));
        }
        Ok(LabeledDataset {
            points,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Point::dim)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] != 0.0).collect()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == 0.0).collect()
    }

    pub fn num_labeled(&self) -> usize {
        self.labels.iter().filter(|&&y| y != 0.0).count()
    }

    /// Replaces the label vector, keeping points and classes.
    pub fn with_labels(&self, labels: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), labels, self.classes.clone())
    }

    /// Ground truth mapped to signs: `positive_class -> +1`, everything else `-1`.
    pub fn truth_signs(&self, positive_class: usize) -> Vec<f64> {
        self.classes
            .iter()
            .map(|&c| if c == positive_class { 1.0 } else { -1.0 })
            .collect()
    }

    /// Sub-dataset on the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        LabeledDataset {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
        }
    }
}

/// Labels `k_per_class` samples of the positive class with `+1` and
/// `k_per_class` samples of the remaining classes with `-1`, uniformly without
/// replacement; every other sample becomes unlabelled.
///
/// Binary tasks use `positive_class` as the `+1` side (class 0 for the
/// synthetic sets, digit 0 for the MNIST 0-vs-8 task). For one-vs-rest subsets
/// the negative side pools all other digits.
pub fn label_k_per_class(
    ds: &LabeledDataset,
    true_classes: &[usize],
    k_per_class: usize,
    positive_class: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if true_classes.len() != ds.len() {
        return Err(Error::Consistency(format!(
            "{} classes for {} points",
            true_classes.len(),
            ds.len()
        )));
    }
    if k_per_class == 0 {
        return Err(Error::invalid("k_per_class must be at least 1"));
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| true_classes[i] == positive_class);
    for (name, group) in [("positive", &pos), ("negative", &neg)] {
        if group.len() < k_per_class {
            return Err(Error::invalid(format!(
                "{name} class has {} members, cannot label {k_per_class}",
                group.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![0.0; ds.len()];
    for (sign, group) in [(1.0, &pos), (-1.0, &neg)] {
        for j in index::sample(&mut rng, group.len(), k_per_class) {
            labels[group[j]] = sign;
        }
    }
    LabeledDataset::new(ds.points.clone(), labels, true_classes.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moons() -> LabeledDataset {
        generate_two_moons(400, 0.05, 7).unwrap()
    }

    #[test]
    fn one_label_per_class() {
        let ds = moons();
        let lab = label_k_per_class(&ds, ds.classes(), 1, 0, 3).unwrap();
        assert_eq!(lab.num_labeled(), 2);
        let idx = lab.labeled_indices();
        let signs: Vec<f64> = idx.iter().map(|&i| lab.labels()[i]).collect();
        assert!(signs.contains(&1.0) && signs.contains(&-1.0));
        for &i in &idx {
            let expected = if ds.classes()[i] == 0 { 1.0 } else { -1.0 };
            assert_eq!(lab.labels()[i], expected);
        }
    }

    #[test]
    fn full_class_size_labels_everything() {
        let ds = moons();
        let lab = label_k_per_class(&ds, ds.classes(), 200, 0, 1).unwrap();
        assert_eq!(lab.num_labeled(), 400);
        assert!(lab.unlabeled_indices().is_empty());
    }

    #[test]
    fn labeled_and_unlabeled_partition() {
        let ds = moons();
        let lab = label_k_per_class(&ds, ds.classes(), 7, 0, 9).unwrap();
        let l = lab.labeled_indices();
        let u = lab.unlabeled_indices();
        assert_eq!(l.len() + u.len(), lab.len());
        assert!(l.iter().all(|i| !u.contains(i)));
        assert!(l.iter().all(|&i| lab.labels()[i].abs() == 1.0));
        assert!(u.iter().all(|&i| lab.labels()[i] == 0.0));
    }

    #[test]
    fn class_too_small() {
        let ds = moons();
        let err = label_k_per_class(&ds, ds.classes(), 201, 0, 0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn labeling_is_deterministic() {
        let ds = moons();
        let a = label_k_per_class(&ds, ds.classes(), 5, 0, 42).unwrap();
        let b = label_k_per_class(&ds, ds.classes(), 5, 0, 42).unwrap();
        assert_eq!(a, b);
        let c = label_k_per_class(&ds, ds.classes(), 5, 0, 43).unwrap();
        assert_ne!(a.labels(), c.labels());
    }

    #[test]
    fn rejects_bad_labels_and_ragged_points() {
        let pts = vec![Point::new(vec![0.0, 1.0]), Point::new(vec![1.0])];
        assert!(LabeledDataset::unlabeled(pts, vec![0, 0]).is_err());
        let pts = vec![Point::new(vec![0.0]), Point::new(vec![1.0])];
        assert!(LabeledDataset::new(pts, vec![0.5, 0.0], vec![0, 0]).is_err());
    }
}
