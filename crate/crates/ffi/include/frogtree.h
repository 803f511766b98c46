#ifndef FROGTREE_H
#define FROGTREE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FtDominanceKind {
  FT_DOMINANCE_KIND_DOMINATES = 0,
  FT_DOMINANCE_KIND_NOT_DOMINATES = 1,
  FT_DOMINANCE_KIND_INCONCLUSIVE = 2,
} FtDominanceKind;

typedef enum FtStatus {
  FT_STATUS_OK = 0,
  FT_STATUS_INVALID_ARGUMENT = 1,
  FT_STATUS_NULL_POINTER = 2,
  FT_STATUS_INVALID_PMF = 3,
  FT_STATUS_PRECONDITION = 4,
  FT_STATUS_SUPPORT_CAP_EXCEEDED = 5,
  FT_STATUS_BRACKET = 6,
  FT_STATUS_SUPERCRITICAL = 7,
  FT_STATUS_PANIC = 8,
} FtStatus;

typedef enum FtVariant {
  FT_VARIANT_SIMPLE = 0,
  FT_VARIANT_NONBACKTRACKING = 1,
} FtVariant;

/**
 * Opaque truncated distribution.
 */
typedef struct FtPmf FtPmf;

/**
 * Opaque simulation configuration.
 */
typedef struct FtSimConfig FtSimConfig;

/**
 * Result of a dominance check. `witness` is set for `NotDominates`,
 * `slack` for `Inconclusive`.
 */
typedef struct FtDominance {
  enum FtDominanceKind kind;
  uint64_t witness;
  double slack;
} FtDominance;

typedef struct FtWeightParams {
  double theta;
  double m;
} FtWeightParams;

typedef struct FtTrialResult {
  uint64_t root_visits;
  uint64_t frogs_woken;
  uint64_t absorbed_at_cap;
  uint64_t frog_steps;
  /**
   * Step at which the work budget stopped the trial, 0 if it did not.
   */
  uint32_t truncated_at;
} FtTrialResult;

typedef struct FtBatchStats {
  uint64_t trials;
  double mean_visits;
  double variance;
  double stderr_visits;
  double mean_woken;
  double mean_absorbed;
  uint64_t truncated_trials;
} FtBatchStats;

typedef struct FtCoverStats {
  double mean;
  double stderr_time;
  uint64_t p10;
  uint64_t p50;
  uint64_t p90;
} FtCoverStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The
 * pointer stays valid until the next call into this library on the thread.
 */
const char *ft_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ft_version(void);

/**
 * Builds a pmf from `len` masses on `0..len` and the mass beyond them.
 *
 * # Safety
 * `masses` must point to `len` readable doubles; `out` must be writable.
 */
enum FtStatus ft_pmf_new(const double *masses,
                         uintptr_t len,
                         double tail_mass,
                         double tol,
                         struct FtPmf **out);

/**
 * `Poi(rate)` truncated so the tail is at most `tol`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_pmf_poisson(double rate, double tol, struct FtPmf **out);

/**
 * # Safety
 * `pmf` must be null or a handle from this library not yet freed.
 */
void ft_pmf_free(struct FtPmf *pmf);

/**
 * Number of explicit masses (support `0..len`).
 *
 * # Safety
 * `pmf` must be a live handle.
 */
uintptr_t ft_pmf_len(const struct FtPmf *pmf);

/**
 * Mass at `k`; zero outside the explicit support or for a null handle.
 *
 * # Safety
 * `pmf` must be a live handle.
 */
double ft_pmf_mass(const struct FtPmf *pmf, uintptr_t k);

/**
 * # Safety
 * `pmf` must be a live handle.
 */
double ft_pmf_tail_mass(const struct FtPmf *pmf);

/**
 * # Safety
 * `pmf` must be a live handle.
 */
double ft_pmf_mean(const struct FtPmf *pmf);

/**
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum FtStatus ft_pmf_total_variation(const struct FtPmf *a, const struct FtPmf *b, double *out);

/**
 * Whether `lower ⪯ upper`, accounting for truncated tails.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum FtStatus ft_dominates(const struct FtPmf *lower,
                           const struct FtPmf *upper,
                           struct FtDominance *out);

/**
 * Star-graph operator applied to an arbitrary law.
 *
 * # Safety
 * `pmf` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_operator_apply(const struct FtPmf *pmf,
                                uintptr_t d,
                                double mu,
                                double tol,
                                struct FtPmf **out);

/**
 * Star-graph operator applied to `Poi(lambda)` in closed form.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_operator_apply_poisson(double lambda,
                                        uintptr_t d,
                                        double mu,
                                        double tol,
                                        struct FtPmf **out);

/**
 * Largest certified bootstrap step. `*has_value` is false when none exists.
 *
 * # Safety
 * `out` and `has_value` must be writable.
 */
enum FtStatus ft_epsilon_max(uintptr_t d, double mu, double *out, bool *has_value);

/**
 * Checks the bootstrap inequality on the default lambda grid.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_verify_nbound(uintptr_t d, double mu, double epsilon, bool *out);

/**
 * `x^-2 + x^(-2/x)` for `x >= 2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_cim_value(double x, double *out);

/**
 * Optimal weight exponent and expansion factor for mean frog count `eta_mean`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_optimal_theta(uintptr_t d, double eta_mean, struct FtWeightParams *out);

/**
 * New simulation config with Poisson(`mu`) sleeping frogs.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_sim_config_new(uintptr_t d,
                                double mu,
                                enum FtVariant variant,
                                uint32_t horizon,
                                uint32_t depth_cap,
                                uint64_t trials,
                                uint64_t seed,
                                struct FtSimConfig **out);

/**
 * Replaces the frog law with a fixed count per vertex.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum FtStatus ft_sim_config_set_fixed(struct FtSimConfig *config, uint32_t k);

/**
 * Drops frogs that cannot reach the root before the horizon.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum FtStatus ft_sim_config_set_prune(struct FtSimConfig *config, bool prune);

/**
 * Per-trial work budget in frog moves; 0 restores the default.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum FtStatus ft_sim_config_set_max_frog_steps(struct FtSimConfig *config, uint64_t steps);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void ft_sim_config_free(struct FtSimConfig *config);

/**
 * Runs trial `index` of `config`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_run_trial(const struct FtSimConfig *config,
                           uint64_t index,
                           struct FtTrialResult *out);

/**
 * Runs all trials of `config`. `visits`, when not null, receives a new
 * handle with the empirical root-visit law.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable; `visits` must be
 * null or writable.
 */
enum FtStatus ft_run_batch(const struct FtSimConfig *config,
                           struct FtBatchStats *out,
                           struct FtPmf **visits);

/**
 * Cover-time statistics of the one-per-site model on the finite tree.
 *
 * # Safety
 * `out` must be writable.
 */
enum FtStatus ft_cover_time(uintptr_t d,
                            uint32_t height,
                            uint64_t trials,
                            uint64_t seed,
                            struct FtCoverStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROGTREE_H */
