#ifndef HEATREG_H
#define HEATREG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HrMetric {
  HR_METRIC_GEODESIC = 0,
  HR_METRIC_EUCLIDEAN = 1,
} HrMetric;

// Result codes.
typedef enum HrStatus {
  HR_STATUS_OK = 0,
  HR_STATUS_INVALID_ARGUMENT = 1,
  HR_STATUS_NULL_POINTER = 2,
  HR_STATUS_NUMERICAL = 3,
  HR_STATUS_FORMAT = 4,
  HR_STATUS_CONSISTENCY = 5,
  HR_STATUS_DEGENERATE_INPUT = 6,
  HR_STATUS_IO = 7,
  HR_STATUS_INTERNAL = 8,
} HrStatus;

typedef enum HrSynthetic {
  HR_SYNTHETIC_TWO_MOONS = 0,
  HR_SYNTHETIC_RING = 1,
  HR_SYNTHETIC_TWO_CLUSTERS = 2,
  // `noise` is read as the number of turns; `seed` is ignored.
  HR_SYNTHETIC_SPIRAL = 3,
} HrSynthetic;

typedef enum HrModel {
  HR_MODEL_NHKRLS = 0,
  HR_MODEL_LAPRLS = 1,
  HR_MODEL_LS = 2,
} HrModel;

// Opaque classifier handle.
typedef struct HrClassifier HrClassifier;

// Opaque dataset handle.
typedef struct HrDataset HrDataset;

// Model hyperparameters. Zero in `epsilon`, `steps_per_unit` or
// `fw_passes` selects the automatic choice.
typedef struct HrParams {
  double gamma_a;
  double gamma_i;
  double epsilon;
  size_t diffusion_steps;
  size_t knn_k;
  double tau;
  double ridge_jitter;
  size_t steps_per_unit;
  enum HrMetric metric;
  size_t fw_passes;
} HrParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *hr_last_error(void);

// Library version as a static NUL-terminated string.
const char *hr_version(void);

// Default hyperparameters.
struct HrParams hr_params_default(void);

// Builds a dataset from `n` row-major points of dimension `dim`, labels in
// {-1, 0, +1} (0 = unlabelled) and optional class ids (NULL = all 0).
//
// # Safety
// `coords` must point to `n * dim` doubles and `labels` to `n` doubles;
// `classes`, if not NULL, to `n` values; `out` must be writable.
enum HrStatus hr_dataset_new(const double *coords,
                             size_t n,
                             size_t dim,
                             const double *labels,
                             const uint32_t *classes,
                             struct HrDataset **out);

// Generates a synthetic two-class dataset (all points unlabelled).
//
// # Safety
// `out` must be writable.
enum HrStatus hr_dataset_generate(enum HrSynthetic kind,
                                  size_t n,
                                  double noise,
                                  uint64_t seed,
                                  struct HrDataset **out);

// New dataset with `k` random points of `positive_class` labelled +1 and `k`
// of the other classes labelled -1.
//
// # Safety
// `ds` must be a live handle and `out` writable.
enum HrStatus hr_dataset_label_per_class(const struct HrDataset *ds,
                                         size_t k,
                                         uint32_t positive_class,
                                         uint64_t seed,
                                         struct HrDataset **out);

// Number of points (0 for NULL).
//
// # Safety
// `ds` must be NULL or a live handle.
size_t hr_dataset_len(const struct HrDataset *ds);

// Point dimension (0 for NULL).
//
// # Safety
// `ds` must be NULL or a live handle.
size_t hr_dataset_dim(const struct HrDataset *ds);

// Copies point `i` into `buf` (room for `dim` doubles) and writes its label
// and class to `label` / `class_id` when those are not NULL.
//
// # Safety
// `ds` must be a live handle, `buf` must hold `hr_dataset_dim(ds)` doubles.
enum HrStatus hr_dataset_point(const struct HrDataset *ds,
                               size_t i,
                               double *buf,
                               double *label,
                               uint32_t *class_id);

// Releases a dataset; NULL is ignored.
//
// # Safety
// `ds` must be NULL or a handle not yet freed.
void hr_dataset_free(struct HrDataset *ds);

// Trains `model` on `ds`. `params` may be NULL for the defaults.
//
// # Safety
// `ds` must be a live handle, `params` NULL or valid, `out` writable.
enum HrStatus hr_train(const struct HrDataset *ds,
                       enum HrModel model,
                       const struct HrParams *params,
                       struct HrClassifier **out);

// Input dimension of a classifier (0 for NULL).
//
// # Safety
// `c` must be NULL or a live handle.
size_t hr_classifier_dim(const struct HrClassifier *c);

// Raw decision value at `x`.
//
// # Safety
// `c` must be a live handle, `x` must hold `dim` doubles, `out` writable.
enum HrStatus hr_predict(const struct HrClassifier *c, const double *x, size_t dim, double *out);

// Predicted sign at `x` (+1 or -1; a zero decision value gives +1).
//
// # Safety
// As [`hr_predict`].
enum HrStatus hr_predict_sign(const struct HrClassifier *c,
                              const double *x,
                              size_t dim,
                              double *out);

// Releases a classifier; NULL is ignored.
//
// # Safety
// `c` must be NULL or a handle not yet freed.
void hr_classifier_free(struct HrClassifier *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATREG_H */
