#ifndef FUNCOORD_H
#define FUNCOORD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FcStatus {
  FC_STATUS_OK = 0,
  FC_STATUS_NULL_POINTER = 1,
  FC_STATUS_INVALID_ARGUMENT = 2,
  FC_STATUS_DIMENSION_MISMATCH = 3,
  FC_STATUS_SINGULAR = 4,
  FC_STATUS_INDEFINITE = 5,
  FC_STATUS_NOT_HERMITIAN = 6,
  FC_STATUS_CONFIG = 7,
  FC_STATUS_IO = 8,
  FC_STATUS_NUMERICAL = 9,
  FC_STATUS_PANIC = 10,
} FcStatus;

/*
 A one-dimensional grid.
 */
typedef struct FcGrid FcGrid;

/*
 A coordinate space on a grid, built from a kernel.
 */
typedef struct FcSpace FcSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into this library from the same thread.
 */
const char *fc_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *fc_version(void);

/*
 Grid of `points` nodes on `[lo, hi]`; periodic grids leave out `hi`.

 # Safety
 `out_grid` must be a valid pointer to writable storage.
 */
enum FcStatus fc_grid_line(double lo,
                           double hi,
                           size_t points,
                           bool periodic,
                           struct FcGrid **out_grid);

/*
 Number of nodes.

 # Safety
 `grid` must come from [`fc_grid_line`]; `out_len` must be writable.
 */
enum FcStatus fc_grid_len(const struct FcGrid *grid, size_t *out_len);

/*
 Copies node coordinates into `coords` (capacity `len`).

 # Safety
 `coords` must hold `len` doubles.
 */
enum FcStatus fc_grid_nodes(const struct FcGrid *grid, double *coords, size_t len);

/*
 Releases a grid; null is ignored.

 # Safety
 `grid` must come from [`fc_grid_line`] and not be used afterwards.
 */
void fc_grid_free(struct FcGrid *grid);

/*
 Space with form `∫∫ k(x,y) conj f(x) g(y)` for a named kernel family
 (`gauss_metric`, `gauss_rho`, `dirac`, ...). `scale` applies to
 `gauss_metric`.

 # Safety
 `grid` must be live, `kernel` a NUL-terminated string, `out_space` writable.
 */
enum FcStatus fc_space_from_kernel(const struct FcGrid *grid,
                                   const char *kernel,
                                   double scale,
                                   struct FcSpace **out_space);

/*
 `(f, g)` in the space; `f` and `g` are interleaved complex samples of
 length `2 * len`.

 # Safety
 `space` must be live; `f` and `g` must hold `2 * len` doubles; `out_re`
 and `out_im` must be writable.
 */
enum FcStatus fc_space_inner(const struct FcSpace *space,
                             const double *f,
                             const double *g,
                             size_t len,
                             double *out_re,
                             double *out_im);

/*
 Releases a space; null is ignored.

 # Safety
 `space` must come from [`fc_space_from_kernel`] and not be used afterwards.
 */
void fc_space_free(struct FcSpace *space);

/*
 Relative deviation of `ρρ*` (Gaussian `ρ`) from the assembled unit-height
 Gaussian metric on a non-periodic line grid, after the best scalar.
 The integration variable runs over the grid widened by `pad`.

 # Safety
 `grid` must be live; the out-pointers must be writable.
 */
enum FcStatus fc_dual_metric_deviation(const struct FcGrid *grid,
                                       double pad,
                                       double *out_deviation,
                                       double *out_scalar);

/*
 Largest geodesic-equation residual along `e^{−iAτ}φ₀` for Hermitian `A`
 (row-major, interleaved, `n × n`) and unit `φ₀`, over `ntaus` times.

 # Safety
 `a` must hold `2 n²` doubles, `phi0` `2 n`, `taus` `ntaus`; `out_residual`
 must be writable.
 */
enum FcStatus fc_geodesic_residual(size_t n,
                                   const double *a,
                                   const double *phi0,
                                   const double *taus,
                                   size_t ntaus,
                                   double *out_residual);

/*
 Runs a CLI experiment (`dual-metric`, `eigen`, `transform-check`, `embed`,
 `geodesic`, `repro`) and writes its CSV tables and JSON summary to
 `out_dir`. `config_text` may be null for the defaults. `out_passed` is set
 to whether every tolerance was met.

 # Safety
 String arguments must be NUL-terminated; `out_passed` must be writable.
 */
enum FcStatus fc_run_experiment(const char *name,
                                const char *config_text,
                                uint64_t seed,
                                const char *out_dir,
                                bool *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUNCOORD_H */
