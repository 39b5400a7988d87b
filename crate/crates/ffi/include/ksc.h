#ifndef KSC_H
#define KSC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KscBias {
  KSC_BIAS_PROPOSED = 0,
  KSC_BIAS_ORIGINAL = 1,
} KscBias;

typedef enum KscEncoding {
  KSC_ENCODING_SIGN = 0,
  KSC_ENCODING_DIRECTION = 1,
} KscEncoding;

typedef enum KscKernel {
  KSC_KERNEL_RBF = 0,
  KSC_KERNEL_CHI_SQUARE = 1,
} KscKernel;

/**
 * Result of every fallible call.
 */
typedef enum KscStatus {
  KSC_STATUS_OK = 0,
  KSC_STATUS_NULL_POINTER = 1,
  KSC_STATUS_INVALID_ARGUMENT = 2,
  KSC_STATUS_DIMENSION = 3,
  KSC_STATUS_NUMERICAL = 4,
  KSC_STATUS_IO = 5,
  KSC_STATUS_PARSE = 6,
  KSC_STATUS_MODEL_FORMAT = 7,
  KSC_STATUS_PANIC = 8,
} KscStatus;

/**
 * Opaque dataset handle.
 */
typedef struct KscDataset KscDataset;

/**
 * Opaque trained model handle.
 */
typedef struct KscModel KscModel;

/**
 * Training options. Fill with [`ksc_train_options_default`] first.
 * `n_tr = 0` trains on every row.
 */
typedef struct KscTrainOptions {
  size_t k_clusters;
  enum KscKernel kernel;
  double param;
  size_t n_tr;
  double eps_tol;
  size_t r_max;
  uint64_t seed;
  enum KscEncoding encoding;
  enum KscBias bias;
} KscTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *ksc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ksc_version(void);

/**
 * Dataset from `rows × cols` row-major values (copied). `labels` may be NULL.
 *
 * # Safety
 * `values` must point to `rows * cols` doubles and `labels`, when not NULL,
 * to `rows` integers.
 */
enum KscStatus ksc_dataset_new(const double *values,
                               size_t rows,
                               size_t cols,
                               const int64_t *labels,
                               struct KscDataset **out);

/**
 * Loads a CSV dataset; with `labeled` the last column holds integer labels.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KscStatus ksc_dataset_load_csv(const char *path, bool labeled, struct KscDataset **out);

/**
 * Labelled two-spiral dataset with the default shape.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum KscStatus ksc_dataset_two_spirals(size_t n,
                                       double noise,
                                       uint64_t seed,
                                       struct KscDataset **out);

/**
 * Number of rows, 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live dataset handle.
 */
size_t ksc_dataset_len(const struct KscDataset *ds);

/**
 * Number of columns, 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live dataset handle.
 */
size_t ksc_dataset_dim(const struct KscDataset *ds);

/**
 * Copies the labels into `out` (length `len`, at least the row count).
 *
 * # Safety
 * `ds` must be a live handle and `out` must hold `len` integers.
 */
enum KscStatus ksc_dataset_labels(const struct KscDataset *ds, int64_t *out, size_t len);

/**
 * # Safety
 * `ds` must be NULL or a handle not yet freed.
 */
void ksc_dataset_free(struct KscDataset *ds);

/**
 * Defaults: 2 clusters, RBF with parameter 1, all rows, eps_tol 1e-3,
 * r_max 500, seed 0, sign encoding, proposed bias.
 *
 * # Safety
 * `opts` must be NULL or point to writable memory for the struct.
 */
void ksc_train_options_default(struct KscTrainOptions *opts);

/**
 * Trains a model. `opts` may be NULL for the defaults.
 *
 * # Safety
 * `ds` must be a live handle, `opts` NULL or valid, `out` a valid pointer.
 */
enum KscStatus ksc_train(const struct KscDataset *ds,
                         const struct KscTrainOptions *opts,
                         struct KscModel **out);

/**
 * Number of reduced-set points, 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live model handle.
 */
size_t ksc_model_rank(const struct KscModel *m);

/**
 * Number of clusters, 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live model handle.
 */
size_t ksc_model_clusters(const struct KscModel *m);

/**
 * Cluster label of every row of `ds`, written to `labels` (length `len`,
 * at least the row count).
 *
 * # Safety
 * Handles must be live and `labels` must hold `len` elements.
 */
enum KscStatus ksc_model_predict(const struct KscModel *m,
                                 const struct KscDataset *ds,
                                 size_t *labels,
                                 size_t len);

/**
 * Row-major `rows × (K−1)` score matrix of `ds`, written to `scores`.
 *
 * # Safety
 * Handles must be live and `scores` must hold `len` doubles.
 */
enum KscStatus ksc_model_scores(const struct KscModel *m,
                                const struct KscDataset *ds,
                                double *scores,
                                size_t len);

/**
 * # Safety
 * `m` must be a live handle and `path` a NUL-terminated string.
 */
enum KscStatus ksc_model_save(const struct KscModel *m, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KscStatus ksc_model_load(const char *path, struct KscModel **out);

/**
 * # Safety
 * `m` must be NULL or a handle not yet freed.
 */
void ksc_model_free(struct KscModel *m);

/**
 * Adjusted Rand index of two labelings of length `n`.
 *
 * # Safety
 * `a` and `b` must hold `n` integers and `out` must be writable.
 */
enum KscStatus ksc_adjusted_rand_index(const int64_t *a, const int64_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSC_H */
