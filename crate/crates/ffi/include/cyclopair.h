#ifndef CYCLOPAIR_H
#define CYCLOPAIR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CyclopairStatus {
  CYCLOPAIR_STATUS_OK = 0,
  CYCLOPAIR_STATUS_NULL_POINTER = 1,
  CYCLOPAIR_STATUS_NOT_ODD_PRIME = 2,
  CYCLOPAIR_STATUS_NOT_IRREGULAR = 3,
  CYCLOPAIR_STATUS_BOUND_EXCEEDED = 4,
  CYCLOPAIR_STATUS_POLE = 5,
  CYCLOPAIR_STATUS_TRIVIALLY_ZERO = 6,
  CYCLOPAIR_STATUS_INTEGRALITY_FAILURE = 7,
  CYCLOPAIR_STATUS_BUFFER_TOO_SMALL = 8,
  CYCLOPAIR_STATUS_INVALID_ARGUMENT = 9,
  CYCLOPAIR_STATUS_PANIC = 10,
} CyclopairStatus;

/**
 * Solved pairing vector for one irregular pair.
 */
typedef struct CyclopairPairing CyclopairPairing;

typedef struct CyclopairDegeneracy {
  uint64_t partner;
  bool two_power_is_one;
  bool partner_exponent_vanishes;
  bool columns_vanish;
  bool pair_irregular;
  bool degeneracy_present;
} CyclopairDegeneracy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library; valid until the next call on this thread.
 */
const char *cyclopair_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void cyclopair_string_free(char *s);

/**
 * `B_k mod p^precision`, precision 1 or 2.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_bernoulli_mod(uint64_t k,
                                             uint64_t p,
                                             uint32_t precision,
                                             uint64_t *out);

/**
 * Whether `(p, r)` is an irregular pair; an invalid `p` is an error.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_is_irregular(uint64_t p, uint64_t r, bool *out);

/**
 * Writes the irregular indices of `p` into `buf` (up to `capacity`) and
 * their count into `len`. Returns `BUFFER_TOO_SMALL` when `capacity` is
 * short; `len` is set either way.
 *
 * # Safety
 * `buf` must be valid for `capacity` writes (or null when `capacity` is 0);
 * `len` must be valid for writes.
 */
enum CyclopairStatus cyclopair_irregular_indices(uint64_t p,
                                                 uint64_t *buf,
                                                 size_t capacity,
                                                 size_t *len);

/**
 * Solves the mod-`p` system for `(p, r)`. On success `*out` owns a handle
 * to release with [`cyclopair_pairing_free`].
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_pairing_solve(uint64_t p,
                                             uint64_t r,
                                             bool include_odd_a,
                                             struct CyclopairPairing **out);

/**
 * # Safety
 * `handle` must come from [`cyclopair_pairing_solve`] and not be used again.
 */
void cyclopair_pairing_free(struct CyclopairPairing *handle);

/**
 * Dimension of the solution space; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t cyclopair_pairing_kernel_dim(const struct CyclopairPairing *handle);

/**
 * Number of entries, `(p-1)/2`; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t cyclopair_pairing_len(const struct CyclopairPairing *handle);

/**
 * `e_{i,r}` in `[0, p)` for odd `i` in `[1, p-2]`.
 *
 * # Safety
 * `handle` must be a live handle; `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_pairing_entry(const struct CyclopairPairing *handle,
                                             uint64_t i,
                                             uint64_t *out);

/**
 * Whether `e_{p-r,r} = 0`.
 *
 * # Safety
 * `handle` must be a live handle; `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_pairing_vanishes_at_p_minus_r(const struct CyclopairPairing *handle,
                                                             bool *out);

/**
 * JSON export `{"p", "r", "kernel_dim", "normalization", "entries"}`.
 * Release `*out` with [`cyclopair_string_free`].
 *
 * # Safety
 * `handle` must be a live handle; `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_pairing_to_json(const struct CyclopairPairing *handle, char **out);

/**
 * `f(0)/p` and `f'(0)` mod `p` for an irregular pair.
 *
 * # Safety
 * Both out-pointers must be valid for writes.
 */
enum CyclopairStatus cyclopair_iwasawa_coeffs(uint64_t p,
                                              uint64_t r,
                                              uint64_t *f0_over_p,
                                              uint64_t *fprime0);

/**
 * `e` such that the mod-`p^2` solution module has order `p^e`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_mod_p2_order_exponent(uint64_t p, uint64_t r, uint32_t *out);

/**
 * Galois relation report as JSON, with the Greenberg verdict.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_galois_relation_json(uint64_t p, uint64_t r, char **out);

/**
 * The `r = (p+3)/2` degeneracy test; needs `p = 1 mod 4`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CyclopairStatus cyclopair_degeneracy_check(uint64_t p,
                                                uint64_t r,
                                                struct CyclopairDegeneracy *out);

/**
 * The weight-12 check: `rho` with `[s_3, s_9] = rho [s_5, s_7]` mod 691,
 * and whether the solved (691, 12) pairing is proportional.
 *
 * # Safety
 * Both out-pointers must be valid for writes.
 */
enum CyclopairStatus cyclopair_ihara_check(uint64_t *ratio, bool *pairing_consistent);

/**
 * Library version string, static.
 */
const char *cyclopair_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYCLOPAIR_H */
