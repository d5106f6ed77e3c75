#ifndef HILL_SPECTRA_H
#define HILL_SPECTRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible function.
typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_INPUT = 2,
  // An iterative method (eigensolver, Newton, fixed point) did not converge.
  HS_STATUS_NON_CONVERGENCE = 3,
  // `|dF/dλ|` vanished: a possibly multiple eigenvalue.
  HS_STATUS_NEAR_CRITICAL = 4,
  // The requested eigenvalue is not simple.
  HS_STATUS_NOT_SIMPLE = 5,
  // Integration failure, pole proximity or another numerical breakdown.
  HS_STATUS_NUMERICAL = 6,
  HS_STATUS_INDEX_OUT_OF_RANGE = 7,
  // A Rust panic was caught at the boundary; this indicates a bug.
  HS_STATUS_PANIC = 8,
} HsStatus;

// Verdict of [`hs_classify`].
typedef enum HsVerdict {
  HS_VERDICT_SINGULAR_AT_INFINITY = 0,
  HS_VERDICT_ASYMPTOTICALLY_SPECTRAL = 1,
  HS_VERDICT_UNDECIDED_NUMERICALLY = 2,
} HsVerdict;

// Opaque traced spectral arc.
typedef struct HsArc HsArc;

// Opaque potential `q(x) = a e^{-2πix} + b e^{2πix}`.
typedef struct HsPotential HsPotential;

// Numerical settings; obtain defaults from [`hs_solver_config_default`].
typedef struct HsSolverConfig {
  // Fourier modes `-M..=M` are kept.
  size_t truncation_half_width;
  double ode_tolerance;
  double newton_tolerance;
  size_t max_newton_iters;
  double eig_deflation_tol;
} HsSolverConfig;

typedef struct HsComplex {
  double re;
  double im;
} HsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hs_version(void);

// Message of the last failure on this thread, or `NULL` if none. The
// pointer stays valid until the next failing call on the same thread.
const char *hs_last_error_message(void);

struct HsSolverConfig hs_solver_config_default(void);

// Creates the potential with coefficients `a` and `b`.
//
// # Safety
// `out` must be valid for writing one pointer.
enum HsStatus hs_potential_new(struct HsComplex a, struct HsComplex b, struct HsPotential **out);

// # Safety
// `pot` must be `NULL` or a pointer from [`hs_potential_new`] not yet freed.
void hs_potential_free(struct HsPotential *pot);

// Eigenvalue with band label `n` of the operator with quasi-momentum `t`.
//
// # Safety
// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
enum HsStatus hs_floquet_eigenvalue(const struct HsPotential *pot,
                                    double t,
                                    int32_t n,
                                    const struct HsSolverConfig *cfg,
                                    struct HsComplex *out);

// Hill discriminant `F(λ)` and its derivative `dF/dλ`.
//
// # Safety
// `pot` must be a live potential, `cfg` `NULL` or valid, outputs writable.
enum HsStatus hs_discriminant(const struct HsPotential *pot,
                              struct HsComplex lambda,
                              const struct HsSolverConfig *cfg,
                              struct HsComplex *out_f,
                              struct HsComplex *out_df);

// Root of `F(λ) = 2 cos t` by Newton's method from `seed`.
//
// # Safety
// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
enum HsStatus hs_solve_characteristic(const struct HsPotential *pot,
                                      double t,
                                      struct HsComplex seed,
                                      const struct HsSolverConfig *cfg,
                                      struct HsComplex *out);

// Biorthogonal pairing `d_n(t)` of the normalized eigenfunctions of the
// operator and its adjoint.
//
// # Safety
// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
enum HsStatus hs_pairing(const struct HsPotential *pot,
                         int32_t n,
                         double t,
                         const struct HsSolverConfig *cfg,
                         struct HsComplex *out);

// Asymptotic-spectrality verdict; `out_alpha` receives `arg(ab)/π` in
// `[0, 2)`, or NaN when `ab = 0`.
//
// # Safety
// `pot` must be a live potential; outputs writable.
enum HsStatus hs_classify(const struct HsPotential *pot,
                          uint64_t q_cap,
                          double rational_tol,
                          enum HsVerdict *out_verdict,
                          double *out_alpha);

// Traces the arc of label `n` on `grid_points` equally spaced values of
// `t ∈ [0, π]`.
//
// # Safety
// `pot` must be a live potential, `cfg` `NULL` or valid, `out` writable.
enum HsStatus hs_trace_arc(const struct HsPotential *pot,
                           int32_t n,
                           size_t grid_points,
                           const struct HsSolverConfig *cfg,
                           struct HsArc **out);

// Number of samples in `arc` (0 for `NULL`).
//
// # Safety
// `arc` must be `NULL` or a live arc.
size_t hs_arc_len(const struct HsArc *arc);

// Sample `index` of `arc`: quasi-momentum, eigenvalue and `|dF/dλ|`.
//
// # Safety
// `arc` must be a live arc; outputs writable.
enum HsStatus hs_arc_sample(const struct HsArc *arc,
                            size_t index,
                            double *out_t,
                            struct HsComplex *out_lambda,
                            double *out_abs_df);

// # Safety
// `arc` must be `NULL` or a pointer from [`hs_trace_arc`] not yet freed.
void hs_arc_free(struct HsArc *arc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HILL_SPECTRA_H */
