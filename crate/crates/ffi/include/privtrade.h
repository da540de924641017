#ifndef PRIVTRADE_H
#define PRIVTRADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtStatus {
  PT_STATUS_OK = 0,
  PT_STATUS_NULL_POINTER = 1,
  PT_STATUS_INVALID_ARGUMENT = 2,
  PT_STATUS_PARSE_ERROR = 3,
  PT_STATUS_UNSUPPORTED = 4,
  PT_STATUS_INTERNAL = 5,
} PtStatus;

typedef enum PtScenario {
  PT_SCENARIO_FULL_DATA = 0,
  PT_SCENARIO_OUTPUT_PERTURBATION = 1,
  PT_SCENARIO_INFERENCE = 2,
} PtScenario;

typedef enum PtPointStatus {
  PT_POINT_STATUS_OPTIMAL = 0,
  PT_POINT_STATUS_APPROXIMATE = 1,
  PT_POINT_STATUS_INFEASIBLE = 2,
} PtPointStatus;

// Opaque joint distribution of two variables.
typedef struct PtJoint PtJoint;

// One solved tradeoff point. `pi` is `+inf` when infeasible.
typedef struct PtPoint {
  double delta;
  double pi;
  double gap;
  enum PtPointStatus status;
} PtPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next
// failing call on the same thread.
const char *pt_last_error(void);

// Library version as a static NUL-terminated string.
const char *pt_version(void);

// Parses a two-axis joint from JSON text. Free the result with [`pt_joint_free`].
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum PtStatus pt_joint_from_json(const char *json, struct PtJoint **out);

// The symmetric pair on `m` symbols with off-diagonal mass `p`.
//
// # Safety
// `out` must be a valid pointer.
enum PtStatus pt_sp_joint(size_t m, double p, struct PtJoint **out);

// Releases a joint. Null is ignored.
//
// # Safety
// `joint` must come from this library and not be freed twice.
void pt_joint_free(struct PtJoint *joint);

// `I(X; Z)` in nats.
//
// # Safety
// `joint` and `out` must be valid pointers.
enum PtStatus pt_mutual_information(const struct PtJoint *joint, double *out);

// Leakage in nats for `measure` in {"mi", "max-info", "sibson", "ip", "dp"}.
//
// # Safety
// `joint`, `measure` and `out` must be valid pointers.
enum PtStatus pt_leakage(const struct PtJoint *joint, const char *measure, double *out);

// Entropy of the common part of `X` and `Z`, in nats.
//
// # Safety
// `joint` and `out` must be valid pointers.
enum PtStatus pt_gk_common_information(const struct PtJoint *joint, double *out);

// Closed-form frontier of the symmetric pair under mutual information and error probability.
//
// # Safety
// `out` must be a valid pointer.
enum PtStatus pt_sp_pi_closed(enum PtScenario scenario,
                              size_t m,
                              double p,
                              double delta,
                              double *out);

// Minimum `I(X; Z)` subject to `Pr(Y != Z) <= delta` for `data` viewed as `(X, Y)`.
//
// # Safety
// `data` and `out` must be valid pointers.
enum PtStatus pt_solve_point(const struct PtJoint *data,
                             enum PtScenario scenario,
                             double delta,
                             uint64_t seed,
                             struct PtPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRIVTRADE_H */
