#ifndef PNKHB_H
#define PNKHB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PnkhbStatus {
  PNKHB_STATUS_OK = 0,
  PNKHB_STATUS_NULL_POINTER = 1,
  PNKHB_STATUS_INVALID_ARGUMENT = 2,
  PNKHB_STATUS_DIMENSION_MISMATCH = 3,
  /**
   * A linear solve or factorization broke down.
   */
  PNKHB_STATUS_NUMERICAL = 4,
  /**
   * A user callback returned nonzero.
   */
  PNKHB_STATUS_CALLBACK_FAILED = 5,
  PNKHB_STATUS_PANIC = 6,
} PnkhbStatus;

typedef enum PnkhbMethod {
  PNKHB_METHOD_PNKHB = 0,
  PNKHB_METHOD_PROJECTED_GRADIENT = 1,
  PNKHB_METHOD_PNCG_TWO_METRIC = 2,
} PnkhbMethod;

/**
 * How a solve ended. Hitting an iteration limit or a failed line search is
 * not an error; the result is still valid.
 */
typedef enum PnkhbSolveStatus {
  PNKHB_SOLVE_STATUS_CONVERGED_XTOL = 0,
  PNKHB_SOLVE_STATUS_CONVERGED_GTOL = 1,
  PNKHB_SOLVE_STATUS_MAX_ITERATIONS = 2,
  PNKHB_SOLVE_STATUS_LINESEARCH_FAILURE = 3,
} PnkhbSolveStatus;

typedef struct PnkhbConfig PnkhbConfig;

/**
 * Objective plus its default starting point.
 */
typedef struct PnkhbProblem PnkhbProblem;

typedef struct PnkhbResult PnkhbResult;

/**
 * `f(x)` into `*out`; return 0 on success.
 */
typedef int32_t (*PnkhbValueFn)(void *user_data, const double *x, size_t n, double *out);

/**
 * `∇f(x)` into `out[0..n]`; return 0 on success.
 */
typedef int32_t (*PnkhbGradientFn)(void *user_data, const double *x, size_t n, double *out);

/**
 * `∇²f(x) v` into `out[0..n]`; return 0 on success.
 */
typedef int32_t (*PnkhbHessVecFn)(void *user_data,
                                  const double *x,
                                  const double *v,
                                  size_t n,
                                  double *out);

/**
 * One outer iteration; `iter = 0` describes the starting point.
 */
typedef struct PnkhbRecord {
  size_t iter;
  double f;
  double proj_grad_norm;
  double step_size;
  size_t ls_trials;
  size_t n_projections;
  size_t ipm_iters_total;
  double active_fraction;
  size_t operator_applies;
  double elapsed_seconds;
} PnkhbRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a success.
 * The pointer stays valid until the next `pnkhb_*` call on this thread.
 */
const char *pnkhb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pnkhb_version(void);

/**
 * `½ xᵀHx + bᵀx` over `[lower, upper]`. `hessian` is `n × n` row-major and
 * must be symmetric. Infinite bounds are allowed. `x0` may be null, in which
 * case the start is the clamp of the origin.
 *
 * # Safety
 * `hessian` must point to `n*n` doubles; `linear`, `lower`, `upper` (and
 * `x0` unless null) to `n` doubles; `out` to writable storage for a pointer.
 */
enum PnkhbStatus pnkhb_problem_quadratic(size_t n,
                                         const double *hessian,
                                         const double *linear,
                                         const double *lower,
                                         const double *upper,
                                         const double *x0,
                                         struct PnkhbProblem **out);

/**
 * The two-dimensional example with `H = [[1,1],[1,2]]`, `b = [1,1]`, box
 * `[−5,0] × [3,8]` and start `[−3,7]`.
 *
 * # Safety
 * `out` must point to writable storage for a pointer.
 */
enum PnkhbStatus pnkhb_problem_fig1(struct PnkhbProblem **out);

/**
 * Random strictly convex box QP of size `n`.
 *
 * # Safety
 * `out` must point to writable storage for a pointer.
 */
enum PnkhbStatus pnkhb_problem_random_qp(size_t n, uint64_t seed, struct PnkhbProblem **out);

/**
 * Synthetic multinomial logistic regression; zero arguments select defaults.
 * Bounds are `±bound` on every weight (`bound ≤ 0` selects the default).
 *
 * # Safety
 * `out` must point to writable storage for a pointer.
 */
enum PnkhbStatus pnkhb_problem_mlr(size_t n_classes,
                                   size_t n_f,
                                   size_t m_f,
                                   size_t n_samples,
                                   double bound,
                                   uint64_t seed,
                                   struct PnkhbProblem **out);

/**
 * Toy spectral CT reconstruction on a `side × side` image (0 selects the
 * default) with a tight upper bound `upper` (`≤ 0` selects the default).
 *
 * # Safety
 * `out` must point to writable storage for a pointer.
 */
enum PnkhbStatus pnkhb_problem_toy_ct(size_t side,
                                      double upper,
                                      uint64_t seed,
                                      struct PnkhbProblem **out);

/**
 * Objective defined by C callbacks. The Hessian callback may return an
 * approximation (for example Gauss-Newton) but must be symmetric.
 * `x0` may be null, in which case the start is the clamp of the origin.
 *
 * # Safety
 * `lower`, `upper` (and `x0` unless null) must point to `n` doubles; the
 * callbacks must stay valid, and `user_data` usable, until the problem is
 * freed.
 */
enum PnkhbStatus pnkhb_problem_callbacks(size_t n,
                                         const double *lower,
                                         const double *upper,
                                         const double *x0,
                                         PnkhbValueFn value,
                                         PnkhbGradientFn gradient,
                                         PnkhbHessVecFn hessvec,
                                         void *user_data,
                                         struct PnkhbProblem **out);

/**
 * Number of variables; 0 for a null problem.
 *
 * # Safety
 * `problem` must be null or a live problem handle.
 */
size_t pnkhb_problem_dim(const struct PnkhbProblem *problem);

/**
 * Copies the default starting point into `out[0..n]`.
 *
 * # Safety
 * `problem` must be a live handle and `out` must point to `n` writable doubles.
 */
enum PnkhbStatus pnkhb_problem_x0(const struct PnkhbProblem *problem, double *out, size_t n);

/**
 * Largest relative error between the gradient and central differences of
 * `f` along 5 random directions at `x`.
 *
 * # Safety
 * `problem` must be a live handle, `x` must point to `n` doubles and
 * `relative_error` to a writable double.
 */
enum PnkhbStatus pnkhb_problem_check_gradient(const struct PnkhbProblem *problem,
                                              const double *x,
                                              size_t n,
                                              uint64_t seed,
                                              double *relative_error);

/**
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void pnkhb_problem_free(struct PnkhbProblem *problem);

/**
 * Solver settings initialized to the library defaults.
 */
struct PnkhbConfig *pnkhb_config_new(void);

/**
 * Sets one option using the configuration-file key names, e.g.
 * `"solver.max_rank"`, `"solver.active_set"`, `"ipm.tol"`.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum PnkhbStatus pnkhb_config_set(struct PnkhbConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void pnkhb_config_free(struct PnkhbConfig *config);

/**
 * Minimizes `problem` from `x0` (null selects the problem's default start)
 * with `config` (null selects defaults). On success `*out` receives a result
 * handle to be released with [`pnkhb_result_free`].
 *
 * # Safety
 * `problem` must be a live handle, `config` null or live, `x0` null or
 * pointing to `n` doubles, and `out` writable.
 */
enum PnkhbStatus pnkhb_solve(const struct PnkhbProblem *problem,
                             const struct PnkhbConfig *config,
                             enum PnkhbMethod method,
                             const double *x0,
                             size_t n,
                             struct PnkhbResult **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
enum PnkhbSolveStatus pnkhb_result_status(const struct PnkhbResult *result);

/**
 * Number of variables in the solution; 0 for a null result.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t pnkhb_result_dim(const struct PnkhbResult *result);

/**
 * Copies the final iterate into `out[0..n]`.
 *
 * # Safety
 * `result` must be a live handle and `out` must point to `n` writable doubles.
 */
enum PnkhbStatus pnkhb_result_x(const struct PnkhbResult *result, double *out, size_t n);

/**
 * Outer iterations performed; the history holds one more record.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t pnkhb_result_iterations(const struct PnkhbResult *result);

/**
 * Final objective value; NaN for a null result.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double pnkhb_result_final_f(const struct PnkhbResult *result);

/**
 * History record `index` in `0..=iterations`; record 0 is the start.
 *
 * # Safety
 * `result` must be a live handle and `out` writable.
 */
enum PnkhbStatus pnkhb_result_record(const struct PnkhbResult *result,
                                     size_t index,
                                     struct PnkhbRecord *out);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void pnkhb_result_free(struct PnkhbResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PNKHB_H */
