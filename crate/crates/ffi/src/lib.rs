//! C ABI for `heatreg`.
//!
//! Datasets and classifiers are opaque heap handles created by `hr_*`
//! constructors and released with the matching `*_free`. Every fallible call
//! returns an [`HrStatus`]; on failure [`hr_last_error`] yields a message for
//! the calling thread. Panics never cross the boundary; they are reported as
//! [`HrStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heatreg::datasets::{
    generate_ring, generate_spiral, generate_two_clusters, generate_two_moons, label_k_per_class,
};
use heatreg::pipeline::{train, ModelKind};
use heatreg::solvers::DiffusionMetric;
use heatreg::{Classifier, Error, LabeledDataset, ModelParams, Point};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Numerical = 3,
    Format = 4,
    Consistency = 5,
    DegenerateInput = 6,
    Io = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrModel {
    Nhkrls = 0,
    Laprls = 1,
    Ls = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrSynthetic {
    TwoMoons = 0,
    Ring = 1,
    TwoClusters = 2,
    /// `noise` is read as the number of turns; `seed` is ignored.
    Spiral = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HrMetric {
    Geodesic = 0,
    Euclidean = 1,
}

/// Model hyperparameters. Zero in `epsilon`, `steps_per_unit` or
/// `fw_passes` selects the automatic choice.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HrParams {
    pub gamma_a: f64,
    pub gamma_i: f64,
    pub epsilon: f64,
    pub diffusion_steps: usize,
    pub knn_k: usize,
    pub tau: f64,
    pub ridge_jitter: f64,
    pub steps_per_unit: usize,
    pub metric: HrMetric,
    pub fw_passes: usize,
}

impl From<&ModelParams> for HrParams {
    fn from(p: &ModelParams) -> Self {
        HrParams {
            gamma_a: p.gamma_a,
            gamma_i: p.gamma_i,
            epsilon: p.epsilon.unwrap_or(0.0),
            diffusion_steps: p.diffusion_steps,
            knn_k: p.knn_k,
            tau: p.tau,
            ridge_jitter: p.ridge_jitter,
            steps_per_unit: p.steps_per_unit.unwrap_or(0),
            metric: match p.diffusion_metric {
                DiffusionMetric::Geodesic => HrMetric::Geodesic,
                DiffusionMetric::Euclidean => HrMetric::Euclidean,
            },
            fw_passes: p.fw_passes.unwrap_or(0),
        }
    }
}

impl From<&HrParams> for ModelParams {
    fn from(p: &HrParams) -> Self {
        let auto = |v: usize| (v != 0).then_some(v);
        ModelParams {
            gamma_a: p.gamma_a,
            gamma_i: p.gamma_i,
            epsilon: (p.epsilon != 0.0).then_some(p.epsilon),
            diffusion_steps: p.diffusion_steps,
            knn_k: p.knn_k,
            tau: p.tau,
            ridge_jitter: p.ridge_jitter,
            steps_per_unit: auto(p.steps_per_unit),
            diffusion_metric: match p.metric {
                HrMetric::Geodesic => DiffusionMetric::Geodesic,
                HrMetric::Euclidean => DiffusionMetric::Euclidean,
            },
            fw_passes: auto(p.fw_passes),
        }
    }
}

/// Opaque dataset handle.
pub struct HrDataset(LabeledDataset);

/// Opaque classifier handle.
pub struct HrClassifier(Classifier);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HrStatus {
    match e {
        Error::InvalidArgument(_) => HrStatus::InvalidArgument,
        Error::Format(_) => HrStatus::Format,
        Error::Consistency(_) => HrStatus::Consistency,
        Error::DegenerateInput(_) => HrStatus::DegenerateInput,
        Error::Numerical { .. } => HrStatus::Numerical,
        Error::Io(_) => HrStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HrStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HrStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            HrStatus::Internal
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default hyperparameters.
#[no_mangle]
pub extern "C" fn hr_params_default() -> HrParams {
    HrParams::from(&ModelParams::default())
}

/// Builds a dataset from `n` row-major points of dimension `dim`, labels in
/// {-1, 0, +1} (0 = unlabelled) and optional class ids (NULL = all 0).
///
/// # Safety
/// `coords` must point to `n * dim` doubles and `labels` to `n` doubles;
/// `classes`, if not NULL, to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_new(
    coords: *const f64,
    n: usize,
    dim: usize,
    labels: *const f64,
    classes: *const u32,
    out: *mut *mut HrDataset,
) -> HrStatus {
    guard(|| {
        non_null(coords, "coords")?;
        non_null(labels, "labels")?;
        non_null(out, "out")?;
        let len = n
            .checked_mul(dim)
            .ok_or_else(|| Error::InvalidArgument("n * dim overflows".into()))?;
        let coords = std::slice::from_raw_parts(coords, len);
        let labels = std::slice::from_raw_parts(labels, n).to_vec();
        let classes = if classes.is_null() {
            vec![0; n]
        } else {
            std::slice::from_raw_parts(classes, n)
                .iter()
                .map(|&c| c as usize)
                .collect()
        };
        let points = if dim == 0 {
            Vec::new()
        } else {
            coords.chunks(dim).map(|c| Point::new(c.to_vec())).collect()
        };
        let ds = LabeledDataset::new(points, labels, classes)?;
        *out = Box::into_raw(Box::new(HrDataset(ds)));
        Ok(())
    })
}

/// Generates a synthetic two-class dataset (all points unlabelled).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_generate(
    kind: HrSynthetic,
    n: usize,
    noise: f64,
    seed: u64,
    out: *mut *mut HrDataset,
) -> HrStatus {
    guard(|| {
        non_null(out, "out")?;
        let ds = match kind {
            HrSynthetic::TwoMoons => generate_two_moons(n, noise, seed)?,
            HrSynthetic::Ring => generate_ring(n, noise, seed)?,
            HrSynthetic::TwoClusters => generate_two_clusters(n, noise, seed)?,
            HrSynthetic::Spiral => generate_spiral(n, noise)?,
        };
        *out = Box::into_raw(Box::new(HrDataset(ds)));
        Ok(())
    })
}

/// New dataset with `k` random points of `positive_class` labelled +1 and `k`
/// of the other classes labelled -1.
///
/// # Safety
/// `ds` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_label_per_class(
    ds: *const HrDataset,
    k: usize,
    positive_class: u32,
    seed: u64,
    out: *mut *mut HrDataset,
) -> HrStatus {
    guard(|| {
        non_null(ds, "dataset")?;
        non_null(out, "out")?;
        let ds = &(*ds).0;
        let labeled = label_k_per_class(ds, ds.classes(), k, positive_class as usize, seed)?;
        *out = Box::into_raw(Box::new(HrDataset(labeled)));
        Ok(())
    })
}

/// Number of points (0 for NULL).
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_len(ds: *const HrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Point dimension (0 for NULL).
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_dim(ds: *const HrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.dim())
}

/// Copies point `i` into `buf` (room for `dim` doubles) and writes its label
/// and class to `label` / `class_id` when those are not NULL.
///
/// # Safety
/// `ds` must be a live handle, `buf` must hold `hr_dataset_dim(ds)` doubles.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_point(
    ds: *const HrDataset,
    i: usize,
    buf: *mut f64,
    label: *mut f64,
    class_id: *mut u32,
) -> HrStatus {
    guard(|| {
        non_null(ds, "dataset")?;
        non_null(buf, "buf")?;
        let ds = &(*ds).0;
        if i >= ds.len() {
            return Err(Error::InvalidArgument(format!("index {i} out of range")).into());
        }
        let c = ds.points()[i].coords();
        std::slice::from_raw_parts_mut(buf, c.len()).copy_from_slice(c);
        if !label.is_null() {
            *label = ds.labels()[i];
        }
        if !class_id.is_null() {
            *class_id = ds.classes()[i] as u32;
        }
        Ok(())
    })
}

/// Releases a dataset; NULL is ignored.
///
/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_dataset_free(ds: *mut HrDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Trains `model` on `ds`. `params` may be NULL for the defaults.
///
/// # Safety
/// `ds` must be a live handle, `params` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_train(
    ds: *const HrDataset,
    model: HrModel,
    params: *const HrParams,
    out: *mut *mut HrClassifier,
) -> HrStatus {
    guard(|| {
        non_null(ds, "dataset")?;
        non_null(out, "out")?;
        let params = params
            .as_ref()
            .map_or_else(ModelParams::default, ModelParams::from);
        let kind = match model {
            HrModel::Nhkrls => ModelKind::Nhkrls,
            HrModel::Laprls => ModelKind::Laprls,
            HrModel::Ls => ModelKind::Ls,
        };
        let report = train(&(*ds).0, kind, &params)?;
        *out = Box::into_raw(Box::new(HrClassifier(report.classifier)));
        Ok(())
    })
}

/// Input dimension of a classifier (0 for NULL).
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_dim(c: *const HrClassifier) -> usize {
    c.as_ref().map_or(0, |c| c.0.dim())
}

unsafe fn predict_with(
    c: *const HrClassifier,
    x: *const f64,
    dim: usize,
    out: *mut f64,
    signed: bool,
) -> HrStatus {
    guard(|| {
        non_null(c, "classifier")?;
        non_null(x, "x")?;
        non_null(out, "out")?;
        let p = Point::new(std::slice::from_raw_parts(x, dim).to_vec());
        let c = &(*c).0;
        *out = if signed {
            c.predict_sign(&p)?
        } else {
            c.predict(&p)?
        };
        Ok(())
    })
}

/// Raw decision value at `x`.
///
/// # Safety
/// `c` must be a live handle, `x` must hold `dim` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_predict(
    c: *const HrClassifier,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> HrStatus {
    predict_with(c, x, dim, out, false)
}

/// Predicted sign at `x` (+1 or -1; a zero decision value gives +1).
///
/// # Safety
/// As [`hr_predict`].
#[no_mangle]
pub unsafe extern "C" fn hr_predict_sign(
    c: *const HrClassifier,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> HrStatus {
    predict_with(c, x, dim, out, true)
}

/// Releases a classifier; NULL is ignored.
///
/// # Safety
/// `c` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_classifier_free(c: *mut HrClassifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
