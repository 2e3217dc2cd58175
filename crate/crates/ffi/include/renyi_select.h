#ifndef RENYI_SELECT_H
#define RENYI_SELECT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum RenyiStatus {
  RENYI_STATUS_OK = 0,
  RENYI_STATUS_NULL_POINTER = 1,
  RENYI_STATUS_INVALID_ARGUMENT = 2,
  RENYI_STATUS_IO = 3,
  RENYI_STATUS_PARSE = 4,
  RENYI_STATUS_INVALID_DATA = 5,
  RENYI_STATUS_NUMERICAL = 6,
  RENYI_STATUS_PANIC = 7,
} RenyiStatus;

typedef enum RenyiCriterion {
  RENYI_CRITERION_CMI_HEURISTIC = 0,
  RENYI_CRITERION_CMI_PERMUTATION = 1,
  RENYI_CRITERION_MI_PERMUTATION = 2,
  RENYI_CRITERION_DELTA_MI_CHI2 = 3,
  RENYI_CRITERION_NONE = 4,
} RenyiCriterion;

typedef struct RenyiConfig RenyiConfig;

typedef struct RenyiDataset RenyiDataset;

typedef struct RenyiTrace RenyiTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *renyi_last_error(void);

// Library version as a static NUL-terminated string.
const char *renyi_version(void);

// Loads a CSV file with a header row. `label` names the label column (or
// gives its 0-based index); NULL selects the last column.
//
// # Safety
// `path` and a non-NULL `label` must be NUL-terminated strings; `out` must
// be writable.
enum RenyiStatus renyi_dataset_load_csv(const char *path,
                                        const char *label,
                                        struct RenyiDataset **out);

// Builds a dataset from column-major values: feature `j` occupies
// `values[j*n_samples .. (j+1)*n_samples]`. Labels are class codes.
//
// # Safety
// `values` must hold `n_samples * n_features` doubles, `labels` must hold
// `n_samples` entries and `out` must be writable.
enum RenyiStatus renyi_dataset_from_columns(const double *values,
                                            uintptr_t n_samples,
                                            uintptr_t n_features,
                                            const uintptr_t *labels,
                                            struct RenyiDataset **out);

// # Safety
// `d` must be NULL or a handle from this library not yet freed.
void renyi_dataset_free(struct RenyiDataset *d);

// # Safety
// `d` must be NULL or a live dataset handle.
uintptr_t renyi_dataset_n_samples(const struct RenyiDataset *d);

// # Safety
// `d` must be NULL or a live dataset handle.
uintptr_t renyi_dataset_n_features(const struct RenyiDataset *d);

// # Safety
// `d` must be NULL or a live dataset handle.
uintptr_t renyi_dataset_n_classes(const struct RenyiDataset *d);

// A configuration with the library defaults (α = 1.01, CMI-heuristic,
// ε = 1e-4, P = 100, θ = 0.95, 5 bins, seed 0, no feature cap).
struct RenyiConfig *renyi_config_new(void);

// # Safety
// `c` must be NULL or a handle from this library not yet freed.
void renyi_config_free(struct RenyiConfig *c);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_alpha(struct RenyiConfig *c, double alpha);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_criterion(struct RenyiConfig *c, enum RenyiCriterion criterion);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_epsilon(struct RenyiConfig *c, double epsilon);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_permutations(struct RenyiConfig *c, uintptr_t permutations);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_theta(struct RenyiConfig *c, double theta);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_chi2_bins(struct RenyiConfig *c, uintptr_t bins);

// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_seed(struct RenyiConfig *c, uint64_t seed);

// Caps the number of selected features; 0 removes the cap.
//
// # Safety
// `c` must be a live configuration handle.
enum RenyiStatus renyi_config_set_max_features(struct RenyiConfig *c, uintptr_t max_features);

// Runs greedy forward selection. A NULL `config` uses the defaults.
//
// # Safety
// `d` must be a live dataset handle, `config` NULL or a live configuration
// handle, and `out` writable.
enum RenyiStatus renyi_select(const struct RenyiDataset *d,
                              const struct RenyiConfig *config,
                              struct RenyiTrace **out);

// # Safety
// `t` must be NULL or a handle from this library not yet freed.
void renyi_trace_free(struct RenyiTrace *t);

// Number of selected features.
//
// # Safety
// `t` must be NULL or a live trace handle.
uintptr_t renyi_trace_len(const struct RenyiTrace *t);

// Stop reason owned by the trace, or NULL for a NULL trace.
//
// # Safety
// `t` must be NULL or a live trace handle.
const char *renyi_trace_stop_reason(const struct RenyiTrace *t);

// `I(S; y)` over all features, in bits.
//
// # Safety
// `t` must be a live trace handle and `out` writable.
enum RenyiStatus renyi_trace_full_mi(const struct RenyiTrace *t, double *out);

// Feature index, MI and residual CMI (bits) of selection step `step`.
// Any of the output pointers may be NULL.
//
// # Safety
// `t` must be a live trace handle; non-NULL outputs must be writable.
enum RenyiStatus renyi_trace_step(const struct RenyiTrace *t,
                                  uintptr_t step,
                                  uintptr_t *feature,
                                  double *mi,
                                  double *cmi);

// `I_α(x_features; y)` in bits using the standardized median-bandwidth
// Gaussian kernels of the selection procedure.
//
// # Safety
// `d` must be a live dataset handle, `features` must hold `n` indices and
// `out` must be writable.
enum RenyiStatus renyi_mutual_information(const struct RenyiDataset *d,
                                          const uintptr_t *features,
                                          uintptr_t n,
                                          double alpha,
                                          double *out);

// `I_α(x_target; y | x_given)` in bits. An empty `given` list gives the
// mutual information.
//
// # Safety
// `d` must be a live dataset handle, index arrays must hold the stated
// counts and `out` must be writable.
enum RenyiStatus renyi_conditional_mutual_information(const struct RenyiDataset *d,
                                                      const uintptr_t *target,
                                                      uintptr_t n_target,
                                                      const uintptr_t *given,
                                                      uintptr_t n_given,
                                                      double alpha,
                                                      double *out);

// Two-sided Wilcoxon rank-sum test. `reject` (may be NULL) receives 1 when
// `p < significance`.
//
// # Safety
// `a` and `b` must hold `na` and `nb` values; `p_value` must be writable.
enum RenyiStatus renyi_wilcoxon_rank_sum(const double *a,
                                         uintptr_t na,
                                         const double *b,
                                         uintptr_t nb,
                                         double significance,
                                         double *p_value,
                                         int32_t *reject);

// `p`-quantile of the chi-square distribution with `df` degrees of freedom.
//
// # Safety
// `out` must be writable.
enum RenyiStatus renyi_chi2_quantile(uint64_t df, double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RENYI_SELECT_H */
