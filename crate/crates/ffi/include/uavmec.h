#ifndef UAVMEC_H
#define UAVMEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum UavmecStatus {
  UAVMEC_STATUS_OK = 0,
  UAVMEC_STATUS_NULL_POINTER = 1,
  UAVMEC_STATUS_INVALID_ARGUMENT = 2,
  UAVMEC_STATUS_PARSE_ERROR = 3,
  UAVMEC_STATUS_SOLVER_ERROR = 4,
  UAVMEC_STATUS_BUFFER_TOO_SMALL = 5,
  UAVMEC_STATUS_PANIC = 6,
} UavmecStatus;

// Design to solve with.
typedef enum UavmecScheme {
  UAVMEC_SCHEME_PROPOSED = 0,
  UAVMEC_SCHEME_STRAIGHT = 1,
  UAVMEC_SCHEME_HOVER_FLY = 2,
} UavmecScheme;

// Opaque plan handle.
typedef struct UavmecPlan UavmecPlan;

// Opaque scenario handle.
typedef struct UavmecScenario UavmecScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Load a scenario file. On success `*out` receives a handle to free with
// `uavmec_scenario_free`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum UavmecStatus uavmec_scenario_load(const char *path, struct UavmecScenario **out);

// Parse scenario text in the same format as scenario files.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum UavmecStatus uavmec_scenario_parse(const char *text, struct UavmecScenario **out);

// Replace the task size (bits).
//
// # Safety
// `scenario` must be a live handle or null.
enum UavmecStatus uavmec_scenario_set_task_bits(struct UavmecScenario *scenario, double task_bits);

// Number of GBSs in the scenario; 0 for a null handle.
//
// # Safety
// `scenario` must be a live handle or null.
size_t uavmec_scenario_num_gbs(const struct UavmecScenario *scenario);

// Release a scenario. Null is ignored.
//
// # Safety
// `scenario` must come from this library and not be used afterwards.
void uavmec_scenario_free(struct UavmecScenario *scenario);

// Minimum-time plan with default solver settings. On success `*out`
// receives a handle to free with `uavmec_plan_free`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum UavmecStatus uavmec_solve(const struct UavmecScenario *scenario,
                               enum UavmecScheme scheme,
                               struct UavmecPlan **out);

// Number of slots `N`; 0 for a null handle.
//
// # Safety
// `plan` must be a live handle or null.
size_t uavmec_plan_n_slots(const struct UavmecPlan *plan);

// Mission completion time in seconds; NaN for a null handle.
//
// # Safety
// `plan` must be a live handle or null.
double uavmec_plan_completion_time(const struct UavmecPlan *plan);

// Total offloaded bits; NaN for a null handle.
//
// # Safety
// `plan` must be a live handle or null.
double uavmec_plan_achieved_bits(const struct UavmecPlan *plan);

// Copy the trajectory as `x0, y0, x1, y1, …` (`2·(N+1)` values). `*needed`
// always receives the required length, so a first call with `len = 0`
// sizes the buffer.
//
// # Safety
// `plan` must be a live handle, `buf` valid for `len` writes, and `needed`
// valid or null.
enum UavmecStatus uavmec_plan_trajectory(const struct UavmecPlan *plan,
                                         double *buf,
                                         size_t len,
                                         size_t *needed);

// Copy the time allocation, slot-major: `tau[(n-1)·K + k]` for slots
// `n = 1..N` (`N·K` values).
//
// # Safety
// As for `uavmec_plan_trajectory`.
enum UavmecStatus uavmec_plan_allocation(const struct UavmecPlan *plan,
                                         double *buf,
                                         size_t len,
                                         size_t *needed);

// Copy the bits delivered to each GBS (`K` values).
//
// # Safety
// As for `uavmec_plan_trajectory`.
enum UavmecStatus uavmec_plan_bits_per_gbs(const struct UavmecPlan *plan,
                                           double *buf,
                                           size_t len,
                                           size_t *needed);

// Release a plan. Null is ignored.
//
// # Safety
// `plan` must come from this library and not be used afterwards.
void uavmec_plan_free(struct UavmecPlan *plan);

// Copy this thread's last error message into `buf` as a NUL-terminated
// string, truncated to `len` bytes. Returns the length the full message
// needs including the terminator; empty after a successful call.
//
// # Safety
// `buf` must be valid for `len` writes, or null with `len = 0`.
size_t uavmec_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *uavmec_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVMEC_H */
