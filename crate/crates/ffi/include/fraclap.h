/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#ifndef FRACLAP_H
#define FRACLAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FL_OK 0

/**
 * Invalid argument: parameter out of range, mismatched lengths, etc.
 */
#define FL_ERR_DOMAIN 1

/**
 * Numerical failure inside the library.
 */
#define FL_ERR_NUMERICAL 2

#define FL_ERR_NULL 3

/**
 * Internal panic caught at the boundary.
 */
#define FL_ERR_PANIC 4

#define FL_FAMILY_SP 0

#define FL_FAMILY_PER 1

#define FL_FAMILY_GL 2

#define FL_FAMILY_T 3

#define FL_FAMILY_Q 4

/**
 * Opaque weight table.
 */
typedef struct FlWeightSet FlWeightSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds the weights `w_0 .. w_m` of `family` for `alpha` and spacing `h`.
 * On success `*out` holds a new handle owned by the caller.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
int fl_weights_new(int family_code, double alpha, double h, size_t m, struct FlWeightSet **out);

/**
 * Releases a handle from `fl_weights_new`. Null is ignored.
 *
 * # Safety
 * `ws` must be null or a handle not yet freed.
 */
void fl_weights_free(struct FlWeightSet *ws);

/**
 * Number of stored weights, `m + 1`; zero for a null handle.
 *
 * # Safety
 * `ws` must be null or a live handle.
 */
size_t fl_weights_len(const struct FlWeightSet *ws);

/**
 * Copies `w_0 .. w_m` into `buf`, which must hold `fl_weights_len` values.
 *
 * # Safety
 * `buf` must be valid for `len` writes.
 */
int fl_weights_copy(const struct FlWeightSet *ws, double *buf, size_t len);

/**
 * Closed-form `(-h^alpha w_0)^{-1}`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
int fl_cfl_cmax(int family_code, double alpha, double *out);

/**
 * Normalization constant `C_{1,alpha}` of the singular integral.
 *
 * # Safety
 * `out` must be valid for a write.
 */
int fl_riesz_constant(double alpha, double *out);

/**
 * Symbol `M(xi)` of the stored weights.
 *
 * # Safety
 * `ws` must be a live handle and `out` valid for a write.
 */
int fl_symbol(const struct FlWeightSet *ws, double xi, double *out);

/**
 * Direct sum of the scheme at every sample of the field `u_{j0} ..
 * u_{j0+n-1}`, extended by zero outside the window.
 *
 * # Safety
 * `u` must be valid for `n` reads and `out` for `n` writes.
 */
int fl_apply_direct(const struct FlWeightSet *ws,
                    int64_t j0,
                    const double *u,
                    size_t n,
                    double *out);

/**
 * FFT evaluation of the same sum as `fl_apply_direct`.
 *
 * # Safety
 * `u` must be valid for `n` reads and `out` for `n` writes.
 */
int fl_apply_fast(const struct FlWeightSet *ws, const double *u, size_t n, double *out);

/**
 * Discrete energy of the zero-extended field.
 *
 * # Safety
 * `u` must be valid for `n` reads and `out` for a write.
 */
int fl_energy(const struct FlWeightSet *ws, const double *u, size_t n, double *out);

/**
 * Copies the last error message of this thread into `buf` as a NUL
 * terminated string, truncated to `len - 1` bytes. Returns the length the
 * full message needs including the terminator; pass a null `buf` to query
 * it.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t fl_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACLAP_H */
