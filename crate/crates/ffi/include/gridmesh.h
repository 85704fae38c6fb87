#ifndef GRIDMESH_H
#define GRIDMESH_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes; the nonzero values match the CLI exit codes where they overlap.
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_INVALID_INPUT = 2,
  GM_STATUS_INFEASIBLE = 3,
  GM_STATUS_SOLVER_FAILURE = 4,
  GM_STATUS_NOT_CONVERGED = 5,
  GM_STATUS_NULL_POINTER = 6,
  GM_STATUS_OUT_OF_RANGE = 7,
  GM_STATUS_PANIC = 8,
} GmStatus;

// Opaque result of a CEM or DEM solve.
typedef struct GmResult GmResult;

// Opaque scenario handle.
typedef struct GmScenario GmScenario;

// ADMM settings passed by value; start from `gm_admm_config_default()`.
typedef struct GmAdmmConfig {
  double rho;
  double beta;
  uintptr_t k_s;
  double epsilon_th;
  uintptr_t max_iters;
  // Stop on the quality threshold alone instead of the combined rule.
  bool reference;
  // Reallocate exchanges proportionally after convergence.
  bool apply_pea;
} GmAdmmConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *gm_last_error(void);

// Loads and validates a scenario JSON file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum GmStatus gm_scenario_load(const char *path, struct GmScenario **out);

// Parses and validates a scenario from a JSON string.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum GmStatus gm_scenario_parse(const char *json, struct GmScenario **out);

// # Safety
// `scenario` must come from `gm_scenario_load`/`gm_scenario_parse` and not be
// freed twice. NULL is ignored.
void gm_scenario_free(struct GmScenario *scenario);

// Number of microgrids, or 0 for NULL.
//
// # Safety
// `scenario` must be NULL or a live handle.
uintptr_t gm_scenario_num_microgrids(const struct GmScenario *scenario);

// Solves the centralized model with the backend named by `GRIDMESH_SOLVER`.
//
// # Safety
// `scenario` must be a live handle and `out` a writable pointer.
enum GmStatus gm_solve_cem(const struct GmScenario *scenario, struct GmResult **out);

// Defaults: rho 0.001, beta 0.001, k_s 100, epsilon_th 0.1, 2000 iterations,
// combined stopping rule, no reallocation.
struct GmAdmmConfig gm_admm_config_default(void);

// Runs the decentralized solver. A result is produced even when the
// iteration budget runs out; the status is then `NotConverged`.
//
// # Safety
// `scenario` must be a live handle, `config` readable and `out` writable.
enum GmStatus gm_solve_dem(const struct GmScenario *scenario,
                           const struct GmAdmmConfig *config,
                           struct GmResult **out);

// # Safety
// `result` must be NULL or a live handle.
double gm_result_objective(const struct GmResult *result);

// Operating cost of the microgrid at position `index` (ascending id).
//
// # Safety
// `result` must be a live handle and `value` writable.
enum GmStatus gm_result_microgrid_objective(const struct GmResult *result,
                                            uintptr_t index,
                                            double *value);

// Iterations run; 0 for centralized results.
//
// # Safety
// `result` must be NULL or a live handle.
uintptr_t gm_result_iterations(const struct GmResult *result);

// Final solution quality; 0 for centralized results.
//
// # Safety
// `result` must be NULL or a live handle.
double gm_result_epsilon(const struct GmResult *result);

// Convergence trace as CSV, or NULL for centralized results. Owned by the
// result handle.
//
// # Safety
// `result` must be NULL or a live handle.
const char *gm_result_trace_csv(const struct GmResult *result);

// Exchange ledger as CSV. Owned by the result handle.
//
// # Safety
// `result` must be NULL or a live handle.
const char *gm_result_ledger_csv(const struct GmResult *result);

// # Safety
// `result` must come from a solve call and not be freed twice. NULL is ignored.
void gm_result_free(struct GmResult *result);

// Euclidean norm of the stacked residual vectors; NaN on NULL input with
// nonzero length.
//
// # Safety
// `r` and `s` must point to `nr` and `ns` readable doubles.
double gm_solution_quality(const double *r, uintptr_t nr, const double *s, uintptr_t ns);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDMESH_H */
