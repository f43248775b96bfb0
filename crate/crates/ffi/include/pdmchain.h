#ifndef PDMCHAIN_H
#define PDMCHAIN_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which operator [`pdm_operator_build`] constructs.
 */
typedef enum PdmOperatorKind {
  /**
   * Uniform hopping chain.
   */
  PDM_OPERATOR_KIND_UNIFORM = 0,
  /**
   * Pure mass-gradient term.
   */
  PDM_OPERATOR_KIND_GRADIENT = 1,
  /**
   * Full operator, canonical sign convention.
   */
  PDM_OPERATOR_KIND_FULL = 2,
  /**
   * Full operator with the literal-sum hopping.
   */
  PDM_OPERATOR_KIND_FULL_LITERAL = 3,
} PdmOperatorKind;

/**
 * Status codes returned by every function.
 */
typedef enum PdmStatus {
  PDM_STATUS_OK = 0,
  PDM_STATUS_NULL_POINTER = 1,
  PDM_STATUS_INVALID_ARGUMENT = 2,
  PDM_STATUS_NOT_CONVERGED = 3,
  PDM_STATUS_DOMAIN = 4,
  PDM_STATUS_PANIC = 5,
} PdmStatus;

/**
 * Opaque tridiagonal operator.
 */
typedef struct PdmOperator PdmOperator;

/**
 * Opaque computed spectrum.
 */
typedef struct PdmSpectrum PdmSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds an operator for `n_sites` sites and gradient `gamma`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PdmStatus pdm_operator_build(enum PdmOperatorKind kind,
                                  size_t n_sites,
                                  double gamma,
                                  struct PdmOperator **out);

/**
 * Builds an operator from `n` diagonal and `n - 1` off-diagonal entries.
 *
 * # Safety
 * `diag` must point to `n` doubles, `off` to `n - 1` doubles (may be null
 * when `n == 1`), and `out` to storage for one handle.
 */
enum PdmStatus pdm_operator_from_arrays(const double *diag,
                                        const double *off,
                                        size_t n,
                                        struct PdmOperator **out);

/**
 * Releases an operator. Null is ignored.
 *
 * # Safety
 * `op` must be null or a handle from this library not yet freed.
 */
void pdm_operator_free(struct PdmOperator *op);

/**
 * Writes the number of sites.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum PdmStatus pdm_operator_len(const struct PdmOperator *op, size_t *out);

/**
 * Writes the Gershgorin enclosure of the spectrum.
 *
 * # Safety
 * `op` must be a live handle; `lo` and `hi` writable.
 */
enum PdmStatus pdm_operator_gershgorin(const struct PdmOperator *op, double *lo, double *hi);

/**
 * Writes the number of eigenvalues strictly below `x`.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum PdmStatus pdm_operator_sturm_count(const struct PdmOperator *op, double x, size_t *out);

/**
 * Computes all eigenvalues, and eigenvectors when `with_vectors` is non-zero.
 * `tol` is relative to the spectral width; pass 0 for the default.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum PdmStatus pdm_spectrum_compute(const struct PdmOperator *op,
                                    double tol,
                                    int32_t with_vectors,
                                    struct PdmSpectrum **out);

/**
 * Releases a spectrum. Null is ignored.
 *
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void pdm_spectrum_free(struct PdmSpectrum *s);

/**
 * Writes the number of eigenvalues.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum PdmStatus pdm_spectrum_len(const struct PdmSpectrum *s, size_t *out);

/**
 * Copies the ascending eigenvalues into `buf`, which holds `cap` doubles.
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to `cap` writable doubles.
 */
enum PdmStatus pdm_spectrum_eigenvalues(const struct PdmSpectrum *s, double *buf, size_t cap);

/**
 * Copies eigenvector `index` (0-based, ascending energy) into `buf`.
 *
 * # Safety
 * `s` must be a live handle; `buf` must point to `cap` writable doubles.
 */
enum PdmStatus pdm_spectrum_eigenvector(const struct PdmSpectrum *s,
                                        size_t index,
                                        double *buf,
                                        size_t cap);

/**
 * Participation ratio of a unit-norm vector of length `n`.
 *
 * # Safety
 * `coeffs` must point to `n` doubles and `out` be writable.
 */
enum PdmStatus pdm_participation_ratio(const double *coeffs, size_t n, double *out);

/**
 * Message for the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *pdm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pdm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDMCHAIN_H */
