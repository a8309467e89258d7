#ifndef CSP_TRANSFER_H
#define CSP_TRANSFER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum CspStatus {
  CSP_STATUS_OK = 0,
  CSP_STATUS_NULL_POINTER = 1,
  CSP_STATUS_INVALID_ARGUMENT = 2,
  CSP_STATUS_DIMENSION_MISMATCH = 3,
  CSP_STATUS_NOT_POSITIVE_DEFINITE = 4,
  CSP_STATUS_NUMERICAL = 5,
  CSP_STATUS_IO = 6,
  CSP_STATUS_FORMAT = 7,
  CSP_STATUS_TOO_FEW_SUBJECTS = 8,
  CSP_STATUS_PANIC = 9,
} CspStatus;

// Which mixing matrix of the synthetic population is perturbed.
typedef enum CspPerturb {
  CSP_PERTURB_NONE = 0,
  CSP_PERTURB_A = 1,
  CSP_PERTURB_B = 2,
  CSP_PERTURB_BOTH = 3,
} CspPerturb;

typedef enum CspMethod {
  CSP_METHOD_CSP = 0,
  CSP_METHOD_COV_CSP = 1,
  CSP_METHOD_MT_CSP = 2,
  CSP_METHOD_SS_CSP = 3,
  CSP_METHOD_SS_MT_CSP = 4,
  CSP_METHOD_SS_CSP_NOISE_ONLY = 5,
} CspMethod;

// Subjects loaded from disk or generated, with lazily built statistics.
typedef struct CspDataset CspDataset;

// Trained spatial filters and their patterns.
typedef struct CspFilterBank CspFilterBank;

// Parameters of one grid point. Only the fields of the chosen method are
// read: `lambda` (covcsp), `lambda1`/`lambda2` (mtcsp), `l`/`nu` (sscsp
// variants), all four of the latter for ss+mtcsp.
typedef struct CspParams {
  double lambda;
  double lambda1;
  double lambda2;
  size_t l;
  size_t nu;
} CspParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message (NUL-terminated, truncated
// to fit) into `buf` and returns the buffer size needed for the full
// message including its NUL, or 0 when the last call succeeded.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t csp_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *csp_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void csp_string_free(char *s);

// Loads a dataset directory.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum CspStatus csp_dataset_load(const char *path, struct CspDataset **out);

// Generates a synthetic population with the default source layout
// (80 channels, 100 trials per class).
//
// # Safety
// `out` must be writable.
enum CspStatus csp_dataset_generate_toy(size_t n_subjects,
                                        double eta,
                                        enum CspPerturb perturb,
                                        uint64_t seed,
                                        struct CspDataset **out);

// Writes the dataset to a directory.
//
// # Safety
// `dataset` must be a live handle; `path` a NUL-terminated string.
enum CspStatus csp_dataset_save(const struct CspDataset *dataset, const char *path);

// # Safety
// `dataset` must be a live handle; `out` writable.
enum CspStatus csp_dataset_subject_count(const struct CspDataset *dataset, size_t *out);

// # Safety
// `dataset` must be a live handle; `out` writable.
enum CspStatus csp_dataset_channels(const struct CspDataset *dataset, size_t *out);

// Releases a dataset. NULL is ignored.
//
// # Safety
// `dataset` must be NULL or a handle not yet freed.
void csp_dataset_free(struct CspDataset *dataset);

// Trains `method` for subject `target` with every other subject as donor
// and `m` filters per class.
//
// # Safety
// `dataset` must be a live handle; `params` readable (NULL allowed for
// `CSP_METHOD_CSP`); `out` writable.
enum CspStatus csp_train_filters(struct CspDataset *dataset,
                                 enum CspMethod method,
                                 size_t target,
                                 const struct CspParams *params,
                                 size_t m,
                                 struct CspFilterBank **out);

// Trains with fixed parameters and reports training- and test-session
// accuracy of the LDA pipeline.
//
// # Safety
// As for [`csp_train_filters`]; the accuracy pointers must be writable.
enum CspStatus csp_evaluate(struct CspDataset *dataset,
                            enum CspMethod method,
                            size_t target,
                            const struct CspParams *params,
                            size_t m,
                            double *train_accuracy,
                            double *test_accuracy);

// Selects parameters by leave-one-subject-out over the other subjects on
// the default grid, then evaluates the target. `params_out` receives the
// selection.
//
// # Safety
// `dataset` must be a live handle; all out-pointers writable.
enum CspStatus csp_evaluate_loso(struct CspDataset *dataset,
                                 enum CspMethod method,
                                 size_t target,
                                 size_t m,
                                 struct CspParams *params_out,
                                 double *train_accuracy,
                                 double *test_accuracy);

// Runs an experiment described by an `ExperimentConfig` JSON document
// (toy study or dataset directory) and returns the result table as CSV.
// Release the string with [`csp_string_free`].
//
// # Safety
// `config_json` must be a NUL-terminated string; `csv_out` writable.
enum CspStatus csp_run_experiment_json(const char *config_json, char **csv_out);

// Plain CSP from two class covariances (`dim × dim`, column-major).
//
// # Safety
// `sigma1` and `sigma2` must point to `dim·dim` readable values; `out`
// writable.
enum CspStatus csp_filter_bank_from_covariances(const double *sigma1,
                                                const double *sigma2,
                                                size_t dim,
                                                size_t m,
                                                struct CspFilterBank **out);

// # Safety
// `bank` must be a live handle; outputs writable.
enum CspStatus csp_filter_bank_shape(const struct CspFilterBank *bank,
                                     size_t *channels,
                                     size_t *filters);

// Filters as a `channels × filters` column-major matrix. `written`
// receives the number of values required even when `len` is too small.
//
// # Safety
// `bank` must be a live handle; `buf` must hold `len` values; `written`
// writable.
enum CspStatus csp_filter_bank_filters(const struct CspFilterBank *bank,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

// Patterns, laid out like [`csp_filter_bank_filters`].
//
// # Safety
// As for [`csp_filter_bank_filters`].
enum CspStatus csp_filter_bank_patterns(const struct CspFilterBank *bank,
                                        double *buf,
                                        size_t len,
                                        size_t *written);

// Log-variance features of one trial (`channels × samples`, row-major);
// one value per filter.
//
// # Safety
// `trial` must hold `channels·samples` values; `features` must hold
// `len` values; `written` writable.
enum CspStatus csp_filter_bank_features(const struct CspFilterBank *bank,
                                        const double *trial,
                                        size_t channels,
                                        size_t samples,
                                        double *features,
                                        size_t len,
                                        size_t *written);

// Releases a filter bank. NULL is ignored.
//
// # Safety
// `bank` must be NULL or a handle not yet freed.
void csp_filter_bank_free(struct CspFilterBank *bank);

// Symmetric KL divergence between two zero-mean Gaussians given by their
// `dim × dim` covariances.
//
// # Safety
// `a`, `b` must hold `dim·dim` values; `out` writable.
enum CspStatus csp_symmetric_kl(const double *a, const double *b, size_t dim, double *out);

// Mean squared cosine of the principal angles between two subspaces given
// by orthonormal column-major bases (`ambient × dim_u`, `ambient × dim_v`).
//
// # Safety
// `u` must hold `ambient·dim_u` values, `v` `ambient·dim_v`; `out` writable.
enum CspStatus csp_subspace_similarity(const double *u,
                                       size_t dim_u,
                                       const double *v,
                                       size_t dim_v,
                                       size_t ambient,
                                       double *out);

// One-sided paired permutation test of `mean(a − b) > 0`.
//
// # Safety
// `a`, `b` must hold `n` values; `p_value` writable.
enum CspStatus csp_paired_permutation_test(const double *a,
                                           const double *b,
                                           size_t n,
                                           double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSP_TRANSFER_H */
