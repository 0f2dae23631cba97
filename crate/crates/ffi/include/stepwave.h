#ifndef STEPWAVE_H
#define STEPWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes returned by every fallible call.
 */
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_UTF8 = 2,
  SW_STATUS_SYNTAX = 3,
  SW_STATUS_VALIDATION = 4,
  SW_STATUS_OVERFLOW = 5,
  SW_STATUS_DOMAIN = 6,
  SW_STATUS_UNAVAILABLE = 7,
  SW_STATUS_INVALID_INPUT = 8,
  SW_STATUS_UNSUPPORTED = 9,
  SW_STATUS_PANIC = 99,
} SwStatus;

/**
 * A parsed problem document.
 */
typedef struct SwProblem SwProblem;

/**
 * A built piecewise solution.
 */
typedef struct SwSolution SwSolution;

/**
 * Flat copy of a divergence diagnostic.
 */
typedef struct SwDivergenceNote {
  size_t row;
  size_t strip;
  size_t k;
  double sigma;
  double max_exponent;
  /**
   * True for overflow, false for plain growth.
   */
  bool overflow;
} SwDivergenceNote;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *sw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sw_version(void);

/**
 * Parses a JSON problem document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a writable pointer.
 * The handle written to `*out` must be released with [`sw_problem_free`].
 */
enum SwStatus sw_problem_from_json(const char *json, struct SwProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from [`sw_problem_from_json`] not yet freed.
 */
void sw_problem_free(struct SwProblem *problem);

/**
 * Serializes a problem back to JSON. Free the string with [`sw_string_free`].
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SwStatus sw_problem_to_json(const struct SwProblem *problem, char **out);

/**
 * Truncation order K of the problem's initial condition.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SwStatus sw_problem_truncation(const struct SwProblem *problem, size_t *out);

/**
 * Predicted growth/overflow notes for every cell and mode. Writes at most
 * `capacity` notes to `notes_out` and the total count to `*count_out`.
 *
 * # Safety
 * `problem` must be a live handle; `notes_out` must hold `capacity` entries
 * (may be null when `capacity` is 0); `count_out` must be writable.
 */
enum SwStatus sw_problem_check_divergence(const struct SwProblem *problem,
                                          struct SwDivergenceNote *notes_out,
                                          size_t capacity,
                                          size_t *count_out);

/**
 * Builds the piecewise solution. Release it with [`sw_solution_free`].
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SwStatus sw_solution_build(const struct SwProblem *problem, struct SwSolution **out);

/**
 * # Safety
 * `solution` must be null or a handle from [`sw_solution_build`] not yet freed.
 */
void sw_solution_free(struct SwSolution *solution);

/**
 * `Psi(t, x)`; fails with `SW_STATUS_UNAVAILABLE` inside overflowed cells.
 *
 * # Safety
 * `solution` must be a live handle and `out` writable.
 */
enum SwStatus sw_solution_evaluate(const struct SwSolution *solution,
                                   double t,
                                   double x,
                                   double *out);

/**
 * Analytic and finite-difference PDE residuals at an interior point.
 *
 * # Safety
 * `solution` must be a live handle; both outputs writable.
 */
enum SwStatus sw_solution_residual(const struct SwSolution *solution,
                                   double t,
                                   double x,
                                   double dt,
                                   double *analytic_out,
                                   double *fd_out);

/**
 * Tolerance scale of the solution (see the Rust `PiecewiseSolution::scale`).
 *
 * # Safety
 * `solution` must be a live handle and `out` writable.
 */
enum SwStatus sw_solution_scale(const struct SwSolution *solution, double *out);

/**
 * Samples the uniform `nt x nx` grid over `[0, T[ x [-l, l[` into
 * `values_out` (row-major, `t` outer). Entries in overflowed cells are NaN.
 * `t_out` (length `nt`) and `x_out` (length `nx`) may be null.
 *
 * # Safety
 * `values_out` must hold `nt * nx` doubles; non-null coordinate buffers
 * must hold `nt` and `nx` doubles respectively.
 */
enum SwStatus sw_solution_grid(const struct SwSolution *solution,
                               size_t nt,
                               size_t nx,
                               double *values_out,
                               double *t_out,
                               double *x_out);

/**
 * CSV (`t,x,psi`, `NA` for absent values) of the uniform `nt x nx` grid.
 * Free the string with [`sw_string_free`].
 *
 * # Safety
 * `solution` must be a live handle and `out` writable.
 */
enum SwStatus sw_solution_csv(const struct SwSolution *solution, size_t nt, size_t nx, char **out);

/**
 * Divergence notes recorded while building. Same buffer protocol as
 * [`sw_problem_check_divergence`].
 *
 * # Safety
 * As for [`sw_problem_check_divergence`].
 */
enum SwStatus sw_solution_notes(const struct SwSolution *solution,
                                struct SwDivergenceNote *notes_out,
                                size_t capacity,
                                size_t *count_out);

/**
 * Spectral pair `(sigma_k, omega_k)` of the operator with coefficients
 * `a[0..len]` (`len` = order + 1, odd) on `[-l, l[`.
 *
 * # Safety
 * `a` must point to `len` doubles; outputs writable.
 */
enum SwStatus sw_spectral_pair(const double *a,
                               size_t len,
                               double l,
                               size_t k,
                               double *sigma_out,
                               double *omega_out);

/**
 * `e^{t [[sigma, omega], [-omega, sigma]]}` written row-major to `out[0..4]`.
 *
 * # Safety
 * `out` must hold 4 doubles.
 */
enum SwStatus sw_block_exp(double sigma, double omega, double t, double *out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void sw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEPWAVE_H */
