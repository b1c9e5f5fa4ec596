#ifndef TARGET_DEFENSE_H
#define TARGET_DEFENSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>

typedef enum TdObjective {
  TD_OBJECTIVE_MIN_TIME = 0,
  TD_OBJECTIVE_MIN_DISTANCE = 1,
} TdObjective;

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  // A value was out of range or a parameter was not positive.
  TD_STATUS_INVALID_ARGUMENT = 2,
  // The parameters break the sensing assumption.
  TD_STATUS_ASSUMPTION_VIOLATION = 3,
  // A geometric computation had no valid answer.
  TD_STATUS_NUMERICAL = 4,
  TD_STATUS_INTERNAL = 5,
  TD_STATUS_PANIC = 6,
} TdStatus;

// Validated game parameters.
typedef struct TdParams TdParams;

// Log of one simulated trial.
typedef struct TdTrial TdTrial;

typedef struct TdCounters {
  uint64_t arrived;
  uint64_t captured;
  uint64_t breached;
  uint64_t escaped;
} TdCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. Valid until
// the next failing call on the same thread.
const char *td_last_error(void);

// Validates parameters and stores a new handle in `*out`.
//
// # Safety
// `out` must be null or valid for one pointer write.
enum TdStatus td_params_new(double target_radius,
                            double sensing_radius,
                            double tsr_width,
                            double speed_ratio,
                            double period,
                            struct TdParams **out);

// # Safety
// `params` must be null or a handle from [`td_params_new`] not yet freed.
void td_params_free(struct TdParams *params);

// # Safety
// `params` must be a live handle and `out` valid for one write.
enum TdStatus td_params_capture_radius(const struct TdParams *params, double *out);

// Lower bound on the Earliest Breach capture fraction.
//
// # Safety
// `params` must be a live handle and `out` valid for one write.
enum TdStatus td_c_infinity(const struct TdParams *params, double *out);

// Whether a defender at polar `(defender_r, defender_theta)` can guarantee
// capture of an intruder at `(intruder_r, intruder_theta)`.
//
// # Safety
// `params` must be a live handle and `out` valid for one write.
enum TdStatus td_is_capturable(const struct TdParams *params,
                               double defender_r,
                               double defender_theta,
                               double intruder_r,
                               double intruder_theta,
                               bool *out);

// Simulates one trial and stores its log in `*out`.
//
// # Safety
// `params` must be a live handle and `out` valid for one pointer write.
enum TdStatus td_trial_run(const struct TdParams *params,
                           double weight,
                           enum TdObjective objective,
                           double horizon,
                           uint64_t seed,
                           struct TdTrial **out);

// # Safety
// `trial` must be null or a handle from [`td_trial_run`] not yet freed.
void td_trial_free(struct TdTrial *trial);

// # Safety
// `trial` must be a live handle and `out` valid for one write.
enum TdStatus td_trial_counters(const struct TdTrial *trial, struct TdCounters *out);

// Captured over arrived at the horizon.
//
// # Safety
// `trial` must be a live handle and `out` valid for one write.
enum TdStatus td_trial_capture_fraction(const struct TdTrial *trial, double *out);

// Writes the trial log as JSON into a new string owned by the caller;
// release it with [`td_string_free`].
//
// # Safety
// `trial` must be a live handle and `out` valid for one pointer write.
enum TdStatus td_trial_to_json(const struct TdTrial *trial, char **out);

// # Safety
// `s` must be null or a string from [`td_trial_to_json`] not yet freed.
void td_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TARGET_DEFENSE_H */
