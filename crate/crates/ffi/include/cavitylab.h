#ifndef CAVITYLAB_H
#define CAVITYLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CavStatus {
  CAV_STATUS_OK = 0,
  CAV_STATUS_NULL_POINTER = 1,
  CAV_STATUS_INVALID_ARGUMENT = 2,
  CAV_STATUS_PARSE_ERROR = 3,
  CAV_STATUS_INVALID_NETWORK = 4,
  CAV_STATUS_INFEASIBLE = 5,
  CAV_STATUS_INFEASIBLE_REFERENCE = 6,
  CAV_STATUS_REFUSED_TOO_LARGE = 7,
  CAV_STATUS_INVALID_PARAMS = 8,
  CAV_STATUS_ENCODE_ERROR = 9,
  CAV_STATUS_BUFFER_TOO_SMALL = 10,
  CAV_STATUS_INTERNAL = 11,
} CavStatus;

/**
 * Opaque decision network.
 */
typedef struct CavNetwork CavNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *cav_last_error_message(void);

/**
 * Parses instance JSON into a new handle stored in `*out`.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be writable.
 */
enum CavStatus cav_network_from_json(const uint8_t *bytes, uintptr_t len, struct CavNetwork **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `net` must come from `cav_network_from_json` and not be used afterwards.
 */
void cav_network_free(struct CavNetwork *net);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `net` must be a live handle or null.
 */
uintptr_t cav_network_num_nodes(const struct CavNetwork *net);

/**
 * Action count T, or 0 for a null handle.
 *
 * # Safety
 * `net` must be a live handle or null.
 */
uintptr_t cav_network_num_actions(const struct CavNetwork *net);

/**
 * Serializes to a NUL-terminated instance JSON string owned by the caller;
 * release it with `cav_string_free`.
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum CavStatus cav_network_to_json(const struct CavNetwork *net, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void cav_string_free(char *s);

/**
 * Exact optimum by enumeration. `argmax` receives `argmax_len` entries and
 * must hold one per node; `optimum` is written on success.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum CavStatus cav_solve_brute(const struct CavNetwork *net,
                               double *optimum,
                               uintptr_t *argmax,
                               uintptr_t argmax_len,
                               bool *unique);

/**
 * CE estimates B(x) for every action of `node` at `depth` (negative for the
 * full expansion). `bc` is `zero`, `gap`, `const:C`, `uniform:LO:HI:SEED`
 * or null for zero. `estimates` receives T values and `decision` the
 * smallest maximizing action.
 *
 * # Safety
 * Pointers must be valid; `estimates` must hold `estimates_len` values.
 */
enum CavStatus cav_ce_vector(const struct CavNetwork *net,
                             uintptr_t node,
                             int64_t depth,
                             const char *bc,
                             double *estimates,
                             uintptr_t estimates_len,
                             uintptr_t *decision);

/**
 * CE decisions for every node. `total` receives F(decisions), which is
 * -inf when a hard constraint is violated. Returns the status of the first
 * failing node, with its decision left at 0.
 *
 * # Safety
 * `decisions` must hold `len` entries and `total` be writable.
 */
enum CavStatus cav_ce_decide_all(const struct CavNetwork *net,
                                 int64_t depth,
                                 const char *bc,
                                 uintptr_t *decisions,
                                 uintptr_t len,
                                 double *total);

/**
 * Two-phase MWIS algorithm on a network that encodes an MWIS instance.
 * `chosen` receives one flag per node; `depth` 0 selects the suggested
 * depth for `epsilon`.
 *
 * # Safety
 * `chosen` must hold `len` entries and `weight` be writable.
 */
enum CavStatus cav_mwis_two_phase(const struct CavNetwork *net,
                                  double epsilon,
                                  uintptr_t depth,
                                  uint64_t seed,
                                  bool *chosen,
                                  uintptr_t len,
                                  double *weight);

/**
 * Suggested even depth for `epsilon`, or 0 outside (0, 1).
 */
uintptr_t cav_suggested_depth(double epsilon);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVITYLAB_H */
