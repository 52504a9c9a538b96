#ifndef HYPERLAP_H
#define HYPERLAP_H

/* Generated by cbindgen. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_OVERFLOW = 3,
  HL_STATUS_TOO_LARGE = 4,
  HL_STATUS_DISCONNECTED = 5,
  HL_STATUS_NUMERICAL = 6,
  HL_STATUS_PARSE = 7,
  HL_STATUS_BUFFER_TOO_SMALL = 8,
  HL_STATUS_IO = 9,
  HL_STATUS_PANIC = 10,
} hl_status;

/**
 * Opaque hypergraph handle.
 */
typedef struct hl_hypergraph hl_hypergraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hl_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length including the NUL, or
 * 0 when there is no message.
 */
size_t hl_last_error(char *buf, size_t cap);

/**
 * Exact binomial coefficient `C(n, k)`.
 */
hl_status hl_binom(uint64_t n, uint64_t k, uint64_t *out);

/**
 * Exact number of good closed s-walks of length `2k` with `k` distinct edges
 * and the maximum number of vertices.
 */
hl_status hl_extremal_walk_count(uint64_t n, uint64_t r, uint64_t s, uint64_t k, uint64_t *out);

/**
 * The complete hypergraph `K^r_n`.
 */
hl_status hl_hypergraph_complete(uint64_t n, uint64_t r, hl_hypergraph **out);

/**
 * A sample of `H^r(n, p)` for `(seed, trial)`.
 */
hl_status hl_hypergraph_sample(uint64_t n,
                               uint64_t r,
                               double p,
                               uint64_t seed,
                               uint64_t trial,
                               hl_hypergraph **out);

/**
 * Parses the text fixture format (`n r m` header, then one edge per line).
 */
hl_status hl_hypergraph_from_text(const char *text, hl_hypergraph **out);

/**
 * Serializes to the text fixture format; release the string with [`hl_string_free`].
 */
hl_status hl_hypergraph_to_text(const hl_hypergraph *h, char **out);

/**
 * Vertex count, edge size and edge count.
 */
hl_status hl_hypergraph_counts(const hl_hypergraph *h, uint64_t *n, uint64_t *r, uint64_t *m);

void hl_hypergraph_free(hl_hypergraph *h);

void hl_string_free(char *s);

/**
 * Ascending eigenvalues of the s-th Laplacian on the positive-degree s-sets.
 */
hl_status hl_loose_spectrum(const hl_hypergraph *h,
                            uint64_t s,
                            double *values,
                            size_t cap,
                            size_t *len);

/**
 * Spectral radius `max(1 - lambda_1, lambda_max - 1)`; `HL_DISCONNECTED` when
 * the auxiliary graph is disconnected or has zero-degree s-sets.
 */
hl_status hl_spectral_radius(const hl_hypergraph *h, uint64_t s, double *out);

/**
 * Closed-form spectrum of the s-th Laplacian of `K^r_n`: distinct values with multiplicities.
 */
hl_status hl_complete_spectrum(uint64_t n,
                               uint64_t r,
                               uint64_t s,
                               double *values,
                               uint64_t *multiplicities,
                               size_t cap,
                               size_t *len);

/**
 * Kneser graph `K(n, s)` adjacency spectrum: integer values with multiplicities.
 */
hl_status hl_kneser_spectrum(uint64_t n,
                             uint64_t s,
                             int64_t *values,
                             uint64_t *multiplicities,
                             size_t cap,
                             size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERLAP_H */
