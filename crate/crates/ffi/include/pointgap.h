#ifndef POINTGAP_H
#define POINTGAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PgStatus {
  PG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PG_STATUS_NULL_POINTER = 1,
  PG_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The reference energy touches the spectrum somewhere on the loop.
   */
  PG_STATUS_GAP_CLOSED = 3,
  /**
   * Eigensolver failure or an unresolvable phase.
   */
  PG_STATUS_SOLVER = 4,
  /**
   * The output buffer is too short; the needed length was written.
   */
  PG_STATUS_BUFFER_TOO_SMALL = 5,
  PG_STATUS_PANIC = 6,
} PgStatus;

typedef enum PgBoundary {
  PG_BOUNDARY_TWISTED = 0,
  PG_BOUNDARY_PERIODIC = 1,
  PG_BOUNDARY_OPEN = 2,
} PgBoundary;

/**
 * Opaque model handle.
 */
typedef struct PgModel PgModel;

/**
 * Winding number of `det[H(θ) - E_ref]` over one period.
 */
typedef struct PgWinding {
  int64_t value;
  double raw_phase_change;
  /**
   * Smallest `|E - E_ref|` over the sampled loop.
   */
  double gap_margin;
  size_t grid_size_used;
} PgWinding;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a two-orbital dot. `*out` is set only on success.
 *
 * # Safety
 * `out` must be null or valid for one pointer write.
 */
enum PgStatus pg_model_new_dot(double lambda,
                               double eps_a_up,
                               double eps_a_down,
                               double eps_b_up,
                               double eps_b_down,
                               double j,
                               double v,
                               struct PgModel **out);

/**
 * Creates a chain with the twist on the boundary link and the `J/2`
 * exchange prefactor.
 *
 * # Safety
 * `out` must be null or valid for one pointer write.
 */
enum PgStatus pg_model_new_chain(size_t sites,
                                 double hopping,
                                 double j,
                                 double v,
                                 enum PgBoundary boundary,
                                 struct PgModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from `pg_model_new_*` not yet freed.
 */
void pg_model_free(struct PgModel *model);

/**
 * Number of Fock states in sector `(n, parity)`.
 *
 * # Safety
 * `model` must be a live handle; `out_dim` must be valid for one write.
 */
enum PgStatus pg_sector_dim(const struct PgModel *model,
                            uint32_t n,
                            int32_t parity,
                            size_t *out_dim);

/**
 * Eigenvalues of the sector Hamiltonian at twist `theta`, written to
 * `re[i], im[i]`. `*out_len` always receives the sector dimension; when it
 * exceeds `capacity` nothing else is written and `BufferTooSmall` is
 * returned.
 *
 * # Safety
 * `re` and `im` must be valid for `capacity` writes; `out_len` for one.
 */
enum PgStatus pg_eigenvalues(const struct PgModel *model,
                             uint32_t n,
                             int32_t parity,
                             double theta,
                             double *re,
                             double *im,
                             size_t capacity,
                             size_t *out_len);

/**
 * Many-body winding of sector `(n, parity)` around `e_re + i e_im`,
 * starting from `n_grid` intervals.
 *
 * # Safety
 * `model` must be a live handle; `out` must be valid for one write.
 */
enum PgStatus pg_many_body_winding(const struct PgModel *model,
                                   uint32_t n,
                                   int32_t parity,
                                   double e_re,
                                   double e_im,
                                   size_t n_grid,
                                   struct PgWinding *out);

/**
 * One-body winding `w` and twice the spin winding, `2 w_s = w_up - w_down`.
 *
 * # Safety
 * `model` must be a live handle; `out` and `out_twice_spin` must be valid
 * for one write each.
 */
enum PgStatus pg_one_body_winding(const struct PgModel *model,
                                  double e_re,
                                  double e_im,
                                  size_t n_grid,
                                  struct PgWinding *out,
                                  int64_t *out_twice_spin);

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POINTGAP_H */
