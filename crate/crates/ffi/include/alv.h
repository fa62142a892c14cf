#ifndef ALV_H
#define ALV_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum AlvStatus {
  ALV_STATUS_OK = 0,
  ALV_STATUS_NULL_POINTER = 1,
  ALV_STATUS_INVALID_ARGUMENT = 2,
  ALV_STATUS_PARSE = 3,
  ALV_STATUS_NOT_CONTACT = 4,
  ALV_STATUS_DEGENERATE = 5,
  ALV_STATUS_PRECONDITION_FAILED = 6,
  ALV_STATUS_CONFIG = 7,
  ALV_STATUS_IO = 8,
  ALV_STATUS_PANIC = 9,
} AlvStatus;

/**
 * Framed 3-manifold with its coframe defining pair.
 */
typedef struct AlvModel AlvModel;

/**
 * Pair of 1-forms with a volume form.
 */
typedef struct AlvPair AlvPair;

/**
 * One criterion: strict margin, whether it holds and the verdict
 * (1 holds, 0 undecided, -1 fails).
 */
typedef struct AlvCheck {
  double margin;
  bool holds;
  int32_t verdict;
} AlvCheck;

typedef struct AlvMarginSummary {
  struct AlvCheck contact_minus;
  struct AlvCheck contact_plus;
  struct AlvCheck liouville;
  struct AlvCheck al;
  struct AlvCheck lin_liouville;
  struct AlvCheck lin_al;
  struct AlvCheck balanced;
  struct AlvCheck closed;
} AlvMarginSummary;

/**
 * Extremes of the Reeb pairings over the grid.
 */
typedef struct AlvReebSummary {
  double minus_on_plus_min;
  double minus_on_plus_max;
  double plus_on_minus_min;
  double plus_on_minus_max;
  struct AlvCheck sum;
  struct AlvCheck individual;
  double determinant_min;
  double determinant_max;
} AlvReebSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *alv_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *alv_version(void);

/**
 * Builds a model from a registry spec such as `sol:catmap` or `sl2`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AlvStatus alv_model_from_spec(const char *spec, size_t grid, struct AlvModel **out);

/**
 * Suspension of a hyperbolic map with expansion exponent `kappa`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AlvStatus alv_model_sol(double kappa, size_t grid, struct AlvModel **out);

/**
 * Constant-structure frame of the geodesic flow.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AlvStatus alv_model_sl2(struct AlvModel **out);

/**
 * Number of grid points of a model, 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t alv_model_len(const struct AlvModel *model);

/**
 * # Safety
 * `model` must be null or a handle not freed before.
 */
void alv_model_free(struct AlvModel *model);

/**
 * Standard pair of the model's coframe defining pair.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum AlvStatus alv_pair_standard(const struct AlvModel *model, struct AlvPair **out);

/**
 * Counterexample pair with parameter `a`.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum AlvStatus alv_pair_counterexample(const struct AlvModel *model,
                                       double a,
                                       struct AlvPair **out);

/**
 * Pair from a registry spec such as `standard+gauge:0.1*sin(2*pi*t)`.
 *
 * # Safety
 * `model` must be a live handle, `spec` NUL-terminated and `out` valid.
 */
enum AlvStatus alv_pair_from_spec(const struct AlvModel *model,
                                  const char *spec,
                                  struct AlvPair **out);

/**
 * `(e^{-sigma} alpha_-, e^{sigma} alpha_+)` for an expression `sigma`.
 *
 * # Safety
 * `pair` must be a live handle, `sigma` NUL-terminated and `out` valid.
 */
enum AlvStatus alv_pair_gauge(const struct AlvPair *pair, const char *sigma, struct AlvPair **out);

/**
 * `(e^{sigma} alpha_-, e^{sigma} alpha_+)` for an expression `sigma`.
 *
 * # Safety
 * `pair` must be a live handle, `sigma` NUL-terminated and `out` valid.
 */
enum AlvStatus alv_pair_conformal(const struct AlvPair *pair,
                                  const char *sigma,
                                  struct AlvPair **out);

/**
 * # Safety
 * `pair` must be null or a handle not freed before.
 */
void alv_pair_free(struct AlvPair *pair);

/**
 * Margins of all criteria. Non-positive tolerances select the defaults.
 *
 * # Safety
 * `pair` must be a live handle and `out` a valid pointer.
 */
enum AlvStatus alv_pair_classify(const struct AlvPair *pair,
                                 double tau_pos,
                                 double tau_eq,
                                 struct AlvMarginSummary *out);

/**
 * Reeb pairings `alpha_-(R_+)`, `alpha_+(R_-)` and the frame determinant.
 *
 * # Safety
 * `pair` must be a live handle and `out` a valid pointer.
 */
enum AlvStatus alv_pair_reeb(const struct AlvPair *pair, struct AlvReebSummary *out);

/**
 * Runs the `verify` command for a TOML run configuration (empty for the
 * defaults) and returns the JSON report. `exit_code` receives 0 when every
 * check passed and 1 otherwise.
 *
 * # Safety
 * `config_toml` must be NUL-terminated; `json` and `exit_code` valid pointers.
 */
enum AlvStatus alv_verify_json(const char *config_toml, char **json, int32_t *exit_code);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not freed before.
 */
void alv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALV_H */
