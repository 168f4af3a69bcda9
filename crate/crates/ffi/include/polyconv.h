#ifndef POLYCONV_H
#define POLYCONV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_INPUT = 2,
  PC_STATUS_PARSE = 3,
  PC_STATUS_RESOURCE_LIMIT = 4,
  PC_STATUS_UTF8 = 5,
  PC_STATUS_IO = 6,
  PC_STATUS_PANIC = 7,
} PcStatus;

/**
 * Opaque finite-support probability distribution.
 */
typedef struct PcDistribution PcDistribution;

/**
 * Opaque convex polyhedron.
 */
typedef struct PcPolyhedron PcPolyhedron;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on this thread.
 */
const char *pc_last_error_message(void);

/**
 * Parses a distribution literal.
 *
 * # Safety
 * `literal` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PcStatus pc_distribution_parse(const char *literal, struct PcDistribution **out);

/**
 * Builds a distribution from `len` atoms; `coords` holds `len * dim`
 * values row by row. Masses must sum to 1.
 *
 * # Safety
 * `coords` and `masses` must point to that many readable doubles.
 */
enum PcStatus pc_distribution_from_atoms(size_t dim,
                                         const double *coords,
                                         const double *masses,
                                         size_t len,
                                         struct PcDistribution **out);

/**
 * Writes the literal form of `d` to `out`; release it with [`pc_string_free`].
 *
 * # Safety
 * `d` must be a live handle and `out` a writable pointer.
 */
enum PcStatus pc_distribution_format(const struct PcDistribution *d, char **out);

/**
 * Dimension of `d`, or 0 for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
size_t pc_distribution_dim(const struct PcDistribution *d);

/**
 * Number of atoms of `d`, or 0 for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
size_t pc_distribution_len(const struct PcDistribution *d);

/**
 * Mass of the atom at `x` (0 when absent).
 *
 * # Safety
 * `x` must point to `dim` readable doubles.
 */
enum PcStatus pc_distribution_mass_at(const struct PcDistribution *d,
                                      const double *x,
                                      size_t dim,
                                      double *out);

/**
 * # Safety
 * `d` must be NULL or a handle not yet freed.
 */
void pc_distribution_free(struct PcDistribution *d);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void pc_string_free(char *s);

/**
 * `F * G`.
 *
 * # Safety
 * `f`, `g` must be live handles and `out` a writable pointer.
 */
enum PcStatus pc_convolve(const struct PcDistribution *f,
                          const struct PcDistribution *g,
                          struct PcDistribution **out);

/**
 * `F^n`; `F^0` is the unit mass at the origin.
 *
 * # Safety
 * `f` must be a live handle and `out` a writable pointer.
 */
enum PcStatus pc_power(const struct PcDistribution *f, uint64_t n, struct PcDistribution **out);

/**
 * `e(alpha H)` truncated at tail mass `tol`; the truncated mass goes to
 * `error_bound` when it is not NULL.
 *
 * # Safety
 * `h` must be a live handle, `out` writable, `error_bound` NULL or writable.
 */
enum PcStatus pc_compound_poisson(double alpha,
                                  const struct PcDistribution *h,
                                  double tol,
                                  struct PcDistribution **out,
                                  double *error_bound);

/**
 * `(1 - p) E + p V`.
 *
 * # Safety
 * `v` must be a live handle and `out` a writable pointer.
 */
enum PcStatus pc_mixture(double p, const struct PcDistribution *v, struct PcDistribution **out);

/**
 * Characteristic function of `f` at `t`.
 *
 * # Safety
 * `t` must point to `dim` readable doubles; `re`, `im` must be writable.
 */
enum PcStatus pc_char_fn(const struct PcDistribution *f,
                         const double *t,
                         size_t dim,
                         double *re,
                         double *im);

/**
 * Total-variation distance.
 *
 * # Safety
 * `f`, `g` must be live handles and `out` writable.
 */
enum PcStatus pc_total_variation(const struct PcDistribution *f,
                                 const struct PcDistribution *g,
                                 double *out);

/**
 * Exact Kolmogorov distance `sup_x |G(x) - H(x)|` over lower orthants.
 *
 * # Safety
 * `g`, `h` must be live handles and `out` writable.
 */
enum PcStatus pc_kolmogorov(const struct PcDistribution *g,
                            const struct PcDistribution *h,
                            double *out);

/**
 * Parses a polyhedron literal: `m <count>`, then one `<t_1 .. t_d> <b|inf>`
 * line per face.
 *
 * # Safety
 * `literal` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PcStatus pc_polyhedron_parse(const char *literal, struct PcPolyhedron **out);

/**
 * # Safety
 * `p` must be NULL or a handle not yet freed.
 */
void pc_polyhedron_free(struct PcPolyhedron *p);

/**
 * `F{P}`.
 *
 * # Safety
 * `f`, `p` must be live handles and `out` writable.
 */
enum PcStatus pc_measure(const struct PcDistribution *f, const struct PcPolyhedron *p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYCONV_H */
