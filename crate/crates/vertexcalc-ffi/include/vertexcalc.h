#ifndef VERTEXCALC_H
#define VERTEXCALC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum VcStatus {
  VC_STATUS_OK = 0,
  VC_STATUS_NULL_POINTER = 1,
  VC_STATUS_INVALID_UTF8 = 2,
  VC_STATUS_PARSE = 3,
  VC_STATUS_NOT_LOCAL = 4,
  VC_STATUS_WINDOW_TOO_SMALL = 5,
  VC_STATUS_UNKNOWN_SUITE = 6,
  VC_STATUS_OUT_OF_RANGE = 7,
  VC_STATUS_PANIC = 8,
} VcStatus;

/**
 * Delta-function decomposition of a local distribution.
 */
typedef struct VcDeltaSum VcDeltaSum;

/**
 * A two-variable distribution with exact cyclotomic coefficients.
 */
typedef struct VcDist VcDist;

/**
 * Table of OPE coefficients.
 */
typedef struct VcOpe VcOpe;

/**
 * Outcome of a verification suite.
 */
typedef struct VcReport VcReport;

/**
 * Field evaluation state for one choice of N: the standard field registry
 * and a memoizing evaluator.
 */
typedef struct VcSession VcSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into the library on the same thread.
 */
const char *vc_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by this library and not yet freed.
 */
void vc_string_free(char *s);

/**
 * Bell polynomial B(n, k) rendered as text, e.g. "3*x1*x2" for (3, 2).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum VcStatus vc_bell(size_t n, size_t k, char **out);

/**
 * Parses a distribution from its JSON form
 * `{"N": n, "zwindow": [lo, hi], "wwindow": [lo, hi], "terms": [[i, j, "c"], ...]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum VcStatus vc_dist_from_json(const char *json, struct VcDist **out);

/**
 * Number of nonzero stored coefficients.
 *
 * # Safety
 * `d` must be null or a live handle from [`vc_dist_from_json`].
 */
size_t vc_dist_term_count(const struct VcDist *d);

/**
 * # Safety
 * `d` must be null or a live handle from [`vc_dist_from_json`].
 */
void vc_dist_free(struct VcDist *d);

/**
 * Decomposes `d` at the `roots`-th roots of unity with one locality order per point.
 * `roots == 0` uses the distribution's own N.
 *
 * # Safety
 * `d` must be a live handle, `orders` must point to `len` values, `out` must be valid.
 */
enum VcStatus vc_decompose(const struct VcDist *d,
                           uint32_t roots,
                           const uint32_t *orders,
                           size_t len,
                           struct VcDeltaSum **out);

/**
 * Number of nonzero (point, derivative) coefficients.
 *
 * # Safety
 * `s` must be null or a live handle from [`vc_decompose`].
 */
size_t vc_delta_sum_term_count(const struct VcDeltaSum *s);

/**
 * Coefficient of the (k, l) term as text in w, or null if the term is absent.
 *
 * # Safety
 * `s` must be null or a live handle from [`vc_decompose`].
 */
char *vc_delta_sum_coeff(const struct VcDeltaSum *s, size_t k, uint32_t l);

/**
 * JSON form of the decomposition, same shape as the CLI's `decompose` output.
 *
 * # Safety
 * `s` must be null or a live handle from [`vc_decompose`].
 */
char *vc_delta_sum_to_json(const struct VcDeltaSum *s);

/**
 * # Safety
 * `s` must be null or a live handle from [`vc_decompose`].
 */
void vc_delta_sum_free(struct VcDeltaSum *s);

/**
 * Creates a session whose points of locality are the `roots`-th roots of unity.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum VcStatus vc_session_new(uint32_t roots, struct VcSession **out);

/**
 * Sets the energy cutoff num/den used for OPE sampling.
 *
 * # Safety
 * `s` must be a live session handle.
 */
enum VcStatus vc_session_set_cutoff(struct VcSession *s, int64_t num, int64_t den);

/**
 * # Safety
 * `s` must be null or a live session handle.
 */
void vc_session_free(struct VcSession *s);

/**
 * OPE of fields `a` and `b`, given by registry name ("phiB", "hD", ...) or
 * JSON expression. With `len == 0` the smallest uniform locality order is searched.
 *
 * # Safety
 * `s` must be a live session, `a` and `b` nul-terminated strings, `orders`
 * must point to `len` values and `out` must be valid.
 */
enum VcStatus vc_ope(struct VcSession *s,
                     const char *a,
                     const char *b,
                     const uint32_t *orders,
                     size_t len,
                     struct VcOpe **out);

/**
 * Number of nonzero OPE coefficients.
 *
 * # Safety
 * `o` must be null or a live handle from [`vc_ope`].
 */
size_t vc_ope_entry_count(const struct VcOpe *o);

/**
 * Identified coefficient at point index `j` (1-based) and pole order `k`,
 * or null if it is zero or could not be identified.
 *
 * # Safety
 * `o` must be null or a live handle from [`vc_ope`].
 */
char *vc_ope_render(const struct VcOpe *o, size_t j, int64_t k);

/**
 * JSON form of the table, same shape as the CLI's `ope` output.
 *
 * # Safety
 * `o` must be null or a live handle from [`vc_ope`].
 */
char *vc_ope_to_json(const struct VcOpe *o);

/**
 * # Safety
 * `o` must be null or a live handle from [`vc_ope`].
 */
void vc_ope_free(struct VcOpe *o);

/**
 * Runs a named verification suite with its default parameters.
 * A report is produced even when some of its checks fail.
 *
 * # Safety
 * `suite` must be a nul-terminated string and `out` a valid pointer.
 */
enum VcStatus vc_verify(const char *suite, struct VcReport **out);

/**
 * # Safety
 * `r` must be null or a live handle from [`vc_verify`].
 */
size_t vc_report_check_count(const struct VcReport *r);

/**
 * # Safety
 * `r` must be null or a live handle from [`vc_verify`].
 */
size_t vc_report_failed_count(const struct VcReport *r);

/**
 * # Safety
 * `r` must be null or a live handle from [`vc_verify`].
 */
char *vc_report_to_json(const struct VcReport *r);

/**
 * # Safety
 * `r` must be null or a live handle from [`vc_verify`].
 */
void vc_report_free(struct VcReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VERTEXCALC_H */
