#ifndef VILWAV_H
#define VILWAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum VilwavStatus {
  VILWAV_STATUS_OK = 0,
  VILWAV_STATUS_NULL_POINTER = 1,
  /**
   * The parent array is not a rooted tree, or a phase is invalid.
   */
  VILWAV_STATUS_INVALID_TREE = 2,
  /**
   * `p` is not prime.
   */
  VILWAV_STATUS_NOT_PRIME = 3,
  /**
   * A table would exceed the size cap.
   */
  VILWAV_STATUS_SIZE_CAP = 4,
  /**
   * `capacity` is smaller than the table; `*len` holds the required size.
   */
  VILWAV_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Wavelet index outside `1..p-1` (or `0..p-1` for β).
   */
  VILWAV_STATUS_OUT_OF_RANGE = 6,
  /**
   * Malformed JSON or inconsistent table shapes.
   */
  VILWAV_STATUS_PARSE = 7,
  /**
   * Verification ran and at least one check failed.
   */
  VILWAV_STATUS_VERIFY_FAILED = 8,
  /**
   * Any other library error.
   */
  VILWAV_STATUS_FAILED = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  VILWAV_STATUS_PANIC = 10,
} VilwavStatus;

/**
 * Opaque handle to an immutable wavelet system.
 */
typedef struct VilwavSystem VilwavSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or NULL after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *vilwav_last_error(void);

/**
 * Builds the system generated by the tree `parent[0..p]` (root 0, `parent[0] == 0`).
 *
 * `phases_turns` may be NULL; otherwise it has `p` entries and `phases_turns[v]` is the
 * phase, in turns within `[0, 1)`, of the edge `parent[v] -> v` (entry 0 is ignored).
 *
 * # Safety
 * `parent` must point to `p` readable values, `phases_turns` to `p` values or be NULL, and
 * `out` must be writable.
 */
enum VilwavStatus vilwav_system_build(const size_t *parent,
                                      size_t p,
                                      const double *phases_turns,
                                      struct VilwavSystem **out);

/**
 * Loads a system from the JSON produced by `vilwav build`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum VilwavStatus vilwav_system_from_json(const char *json, struct VilwavSystem **out);

/**
 * Serializes the system as JSON into a new string released with [`vilwav_string_free`].
 *
 * # Safety
 * `system` must be a live handle and `out` writable.
 */
enum VilwavStatus vilwav_system_to_json(const struct VilwavSystem *system, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from [`vilwav_system_to_json`] and not be freed twice.
 */
void vilwav_string_free(char *s);

/**
 * Releases a system handle. NULL is ignored.
 *
 * # Safety
 * `system` must come from this library and not be freed twice.
 */
void vilwav_system_free(struct VilwavSystem *system);

/**
 * The prime `p`, or 0 for NULL.
 *
 * # Safety
 * `system` must be a live handle or NULL.
 */
size_t vilwav_system_p(const struct VilwavSystem *system);

/**
 * The support exponent `M = height - 2`, or 0 for NULL.
 *
 * # Safety
 * `system` must be a live handle or NULL.
 */
size_t vilwav_system_m(const struct VilwavSystem *system);

/**
 * Copies `φ` (cells of `G_hi` inside `G_lo`, canonical order). `lo`/`hi` may be NULL.
 *
 * # Safety
 * `system` must be live; `out` must hold `2 * capacity` doubles or be NULL; `len` writable.
 */
enum VilwavStatus vilwav_system_phi(const struct VilwavSystem *system,
                                    double *out,
                                    size_t capacity,
                                    size_t *len,
                                    int32_t *lo,
                                    int32_t *hi);

/**
 * Copies `ψ_l`, `1 ≤ l ≤ p - 1`.
 *
 * # Safety
 * As for [`vilwav_system_phi`].
 */
enum VilwavStatus vilwav_system_psi(const struct VilwavSystem *system,
                                    size_t l,
                                    double *out,
                                    size_t capacity,
                                    size_t *len,
                                    int32_t *lo,
                                    int32_t *hi);

/**
 * Copies the `p²` refinement coefficients: `β` for `l = 0`, `β^{(l)}` for `1 ≤ l ≤ p - 1`.
 * Entry `j = a₋₁ + p·a₋₂` belongs to the shift `a₋₁g₋₁ + a₋₂g₋₂`.
 *
 * # Safety
 * As for [`vilwav_system_phi`].
 */
enum VilwavStatus vilwav_system_beta(const struct VilwavSystem *system,
                                     size_t l,
                                     double *out,
                                     size_t capacity,
                                     size_t *len);

/**
 * Runs the verification suite (`full != 0` adds the time-domain and Gram checks).
 * Returns [`VilwavStatus::VerifyFailed`] if any check fails; `max_deviation` may be NULL.
 *
 * # Safety
 * `system` must be live; `max_deviation` writable or NULL.
 */
enum VilwavStatus vilwav_system_verify(const struct VilwavSystem *system,
                                       int32_t full,
                                       double tol,
                                       double *max_deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VILWAV_H */
