#ifndef ACCRLAB_H
#define ACCRLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AccrlabStatus {
  ACCRLAB_STATUS_OK = 0,
  ACCRLAB_STATUS_NULL_POINTER = 1,
  ACCRLAB_STATUS_INVALID_UTF8 = 2,
  // Malformed scenario or unknown builtin.
  ACCRLAB_STATUS_PARSE = 3,
  // The scenario could not be evaluated (domain, degenerate metric, ...).
  ACCRLAB_STATUS_EVALUATION = 4,
  ACCRLAB_STATUS_PANIC = 5,
} AccrlabStatus;

// Opaque report handle.
typedef struct AccrlabReport AccrlabReport;

// Opaque scenario handle.
typedef struct AccrlabScenario AccrlabScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a scenario from UTF-8 JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum AccrlabStatus accrlab_scenario_from_json(const char *json, struct AccrlabScenario **out);

// Builds a builtin scenario by name. `n` = 0 selects the default size.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum AccrlabStatus accrlab_scenario_builtin(const char *name,
                                            uint32_t n,
                                            uint64_t seed,
                                            struct AccrlabScenario **out);

// # Safety
// `s` must come from this library and not be freed twice; null is ignored.
void accrlab_scenario_free(struct AccrlabScenario *s);

// Runs every check of a scenario. `seed` and `points` override the
// scenario's sampler when `has_seed` / `points` are nonzero.
//
// # Safety
// `s` must be a live scenario handle and `out` a valid pointer.
enum AccrlabStatus accrlab_run(const struct AccrlabScenario *s,
                               bool has_seed,
                               uint64_t seed,
                               uint32_t points,
                               bool inverse,
                               struct AccrlabReport **out);

// # Safety
// `r` must come from this library and not be freed twice; null is ignored.
void accrlab_report_free(struct AccrlabReport *r);

// The report as JSON; release it with [`accrlab_string_free`].
//
// # Safety
// `r` must be a live report handle and `out` a valid pointer.
enum AccrlabStatus accrlab_report_json(const struct AccrlabReport *r, char **out);

// # Safety
// `s` must come from [`accrlab_report_json`]; null is ignored.
void accrlab_string_free(char *s);

// Whether no check failed.
//
// # Safety
// `r` must be a live report handle and `out` a valid pointer.
enum AccrlabStatus accrlab_report_passed(const struct AccrlabReport *r, bool *out);

// # Safety
// `r` must be a live report handle and `out` a valid pointer.
enum AccrlabStatus accrlab_report_check_count(const struct AccrlabReport *r, uintptr_t *out);

// τ, τ* and τ̃ of the scenario's transformed structure at `point`, written
// to `out[0..3]`. `len` must equal 2n+1.
//
// # Safety
// `point` must hold `len` doubles and `out` room for three.
enum AccrlabStatus accrlab_scalar_curvatures(const struct AccrlabScenario *s,
                                             const double *point,
                                             uintptr_t len,
                                             double *out);

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *accrlab_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACCRLAB_H */
