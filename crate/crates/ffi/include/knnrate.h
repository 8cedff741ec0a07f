#ifndef KNNRATE_H
#define KNNRATE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum KnnrateStatus {
  KNNRATE_STATUS_OK = 0,
  KNNRATE_STATUS_NULL_POINTER = 1,
  KNNRATE_STATUS_INVALID_ARGUMENT = 2,
  KNNRATE_STATUS_DIMENSION_MISMATCH = 3,
  KNNRATE_STATUS_INVALID_K = 4,
  KNNRATE_STATUS_NON_FINITE = 5,
  KNNRATE_STATUS_EMPTY_INPUT = 6,
  KNNRATE_STATUS_MISSING_PARAMETER = 7,
  KNNRATE_STATUS_OVERFLOW = 8,
  // The caller's buffer is too small; the required length was written.
  KNNRATE_STATUS_BUFFER_TOO_SMALL = 9,
  KNNRATE_STATUS_CONFIG = 10,
  KNNRATE_STATUS_IO = 11,
  KNNRATE_STATUS_UNSUPPORTED = 12,
  KNNRATE_STATUS_DEGENERATE_FIT = 13,
  KNNRATE_STATUS_PANIC = 14,
} KnnrateStatus;

// Rate-optimal k modes.
typedef enum KnnrateKMode {
  KNNRATE_K_MODE_REGRESSION = 0,
  KNNRATE_K_MODE_LEVEL_SET = 1,
  KNNRATE_K_MODE_MAXIMA = 2,
} KnnrateKMode;

// Exact k-NN index over a point set.
typedef struct KnnrateIndex KnnrateIndex;

// k-NN regressor owning a copy of its data.
typedef struct KnnrateRegressor KnnrateRegressor;

// Bound constants; NaN marks an absent value, `d = 0` an absent intrinsic
// dimension.
typedef struct KnnrateBoundParams {
  size_t dim;
  double gamma;
  double p0;
  double r0;
  double sigma;
  double delta;
  double alpha;
  double c_alpha;
  double beta;
  double c_low;
  double c_high;
  double r_m;
  size_t d;
  double tau;
  double m2;
} KnnrateBoundParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call on the same thread.
const char *knnrate_last_error(void);

// Builds an index over `n` points of dimension `dim`, row-major in `coords`.
//
// # Safety
// `coords` must point to `n * dim` readable doubles and `out` to writable
// storage for one pointer.
enum KnnrateStatus knnrate_index_new(const double *coords,
                                     size_t n,
                                     size_t dim,
                                     struct KnnrateIndex **out);

// # Safety
// `index` must be null or a handle from [`knnrate_index_new`] not yet freed.
void knnrate_index_free(struct KnnrateIndex *index);

// Tie-inclusive k-NN query. Writes the k-NN radius and the ascending member
// indices. When `cap` is too small, writes the required count and returns
// `BufferTooSmall`.
//
// # Safety
// `index` must be a live handle, `query` must hold the index dimension,
// `out_indices` must have room for `cap` entries.
enum KnnrateStatus knnrate_index_knn(const struct KnnrateIndex *index,
                                     const double *query,
                                     size_t k,
                                     double *out_radius,
                                     size_t *out_indices,
                                     size_t cap,
                                     size_t *out_count);

// Indices of all points within distance `r` of `query`, ascending.
//
// # Safety
// As for [`knnrate_index_knn`].
enum KnnrateStatus knnrate_index_range(const struct KnnrateIndex *index,
                                       const double *query,
                                       double r,
                                       size_t *out_indices,
                                       size_t cap,
                                       size_t *out_count);

// # Safety
// `x` must hold `n * dim` doubles, `y` must hold `n` doubles and `out` must
// be writable.
enum KnnrateStatus knnrate_regressor_new(const double *x,
                                         const double *y,
                                         size_t n,
                                         size_t dim,
                                         size_t k,
                                         struct KnnrateRegressor **out);

// # Safety
// `reg` must be null or a handle from [`knnrate_regressor_new`] not yet freed.
void knnrate_regressor_free(struct KnnrateRegressor *reg);

// Predictions at `m` queries, row-major in `queries`, written to `out`.
//
// # Safety
// `reg` must be live, `queries` must hold `m * dim` doubles and `out` must
// have room for `m` doubles.
enum KnnrateStatus knnrate_regressor_predict(const struct KnnrateRegressor *reg,
                                             const double *queries,
                                             size_t m,
                                             double *out);

// k-NN radius at `query`.
//
// # Safety
// `reg` must be live, `query` must hold the data dimension.
enum KnnrateStatus knnrate_regressor_radius(const struct KnnrateRegressor *reg,
                                            const double *query,
                                            double *out);

// Sample indices whose prediction is at least `lambda - epsilon`.
//
// # Safety
// `reg` must be live and `out_indices` must have room for `cap` entries.
enum KnnrateStatus knnrate_regressor_level_set(const struct KnnrateRegressor *reg,
                                               double lambda,
                                               double epsilon,
                                               size_t *out_indices,
                                               size_t cap,
                                               size_t *out_count);

// Sample index with the largest prediction (smallest index on ties).
//
// # Safety
// `reg` must be live; the out pointers must be writable.
enum KnnrateStatus knnrate_regressor_argmax(const struct KnnrateRegressor *reg,
                                            size_t *out_index,
                                            double *out_value);

// Hausdorff distance between two point sets of dimension `dim`.
//
// # Safety
// `a` must hold `na * dim` doubles and `b` must hold `nb * dim`.
enum KnnrateStatus knnrate_hausdorff(const double *a,
                                     size_t na,
                                     const double *b,
                                     size_t nb,
                                     size_t dim,
                                     double *out);

// Parameters for dimension `dim` with every constant absent.
struct KnnrateBoundParams knnrate_bound_params_init(size_t dim);

// `2 sigma sqrt((D log n + log(2/delta)) / k)`.
//
// # Safety
// `params` must be readable and `out` writable.
enum KnnrateStatus knnrate_variance_term(const struct KnnrateBoundParams *params,
                                         size_t n,
                                         size_t k,
                                         double *out);

// `(2k / (gamma v_D n p0))^{1/D}`.
//
// # Safety
// `params` must be readable and `out` writable.
enum KnnrateStatus knnrate_radius_bound(const struct KnnrateBoundParams *params,
                                        size_t n,
                                        size_t k,
                                        double *out);

// `(4k / (v_d n p0))^{1/d}`.
//
// # Safety
// `params` must be readable and `out` writable.
enum KnnrateStatus knnrate_manifold_radius_bound(const struct KnnrateBoundParams *params,
                                                 size_t n,
                                                 size_t k,
                                                 double *out);

// Uniform error bound; `manifold != 0` uses the intrinsic radius bound.
//
// # Safety
// `params` must be readable and `out` writable.
enum KnnrateStatus knnrate_holder_bound(const struct KnnrateBoundParams *params,
                                        size_t n,
                                        size_t k,
                                        bool manifold,
                                        double *out);

// Squared-distance bound on the k-NN argmax.
//
// # Safety
// `params` must be readable and `out` writable.
enum KnnrateStatus knnrate_maxima_bound_sq(const struct KnnrateBoundParams *params,
                                           size_t n,
                                           size_t k,
                                           double *out);

// Hausdorff bound for the level-set estimate.
//
// # Safety
// `params` must be readable and `out` writable.
enum KnnrateStatus knnrate_level_set_bound(const struct KnnrateBoundParams *params,
                                           size_t n,
                                           size_t k,
                                           double *out);

// `max(1, round(n^e))` with the mode's optimal exponent.
size_t knnrate_optimal_k(size_t n, double alpha, size_t dim, enum KnnrateKMode mode);

// `D * n^D`, failing with `Overflow` when it exceeds 64 bits.
//
// # Safety
// `out` must be writable.
enum KnnrateStatus knnrate_set_count_bound(uint64_t n, uint32_t dim, uint64_t *out);

// Runs the experiment `kind` (`regress`, `manifold`, `levelset`, `maxima`,
// `coverage`, `setcount`) from a config file and writes its CSV records to
// `out_path`.
//
// # Safety
// All pointers must be nul-terminated strings.
enum KnnrateStatus knnrate_run_experiment(const char *config_path,
                                          const char *kind,
                                          const char *out_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KNNRATE_H */
