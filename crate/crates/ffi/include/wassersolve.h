#ifndef WASSERSOLVE_H
#define WASSERSOLVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  WS_STATUS_NULL_POINTER = 1,
  WS_STATUS_INVALID_ARGUMENT = 2,
  WS_STATUS_IO = 3,
  WS_STATUS_PARSE = 4,
  /**
   * The mesh is not admissible or a triangle is not acute.
   */
  WS_STATUS_MESH = 5,
  /**
   * Newton or barrier iteration failed.
   */
  WS_STATUS_SOLVER = 6,
  /**
   * The barrier floor was reached before the outer tolerance.
   */
  WS_STATUS_NOT_CONVERGED = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  WS_STATUS_INTERNAL = 8,
} WsStatus;

typedef enum WsScheme {
  /**
   * Potentials on the quadrilateral subdivision of the density mesh.
   */
  WS_SCHEME_ENRICHED = 0,
  WS_SCHEME_NON_ENRICHED = 1,
} WsScheme;

typedef enum WsReconstruction {
  WS_RECONSTRUCTION_LINEAR = 0,
  WS_RECONSTRUCTION_HARMONIC = 1,
} WsReconstruction;

/**
 * Density mesh and potential mesh.
 */
typedef struct WsMeshPair WsMeshPair;

/**
 * Mesh pair, boundary densities, time steps and reconstruction.
 */
typedef struct WsProblem WsProblem;

typedef struct WsSolution WsSolution;

/**
 * Barrier method settings. Fill with [`ws_solver_params_default`] and
 * adjust.
 */
typedef struct WsSolverParams {
  double mu0;
  double theta;
  double eps0;
  double eps_mu;
  double alpha_min;
  size_t n_max;
  double theta_max;
  /**
   * Stop on the unperturbed residual instead of the gap bound.
   */
  bool stop_on_residual;
  double mu_floor;
  size_t max_outer;
} WsSolverParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, empty if none. Owned by the
 * library.
 */
const char *ws_last_error(void);

/**
 * Library version, a static string.
 */
const char *ws_version(void);

/**
 * Writes the default barrier settings into `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `WsSolverParams`.
 */
enum WsStatus ws_solver_params_default(struct WsSolverParams *out);

/**
 * Acute triangulation of the unit square with nominal size `hbar`, paired
 * with its subdivision (enriched) or with itself.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum WsStatus ws_mesh_pair_generate(double hbar, enum WsScheme scheme, struct WsMeshPair **out);

/**
 * Loads a density mesh file and builds the pair for `scheme`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum WsStatus ws_mesh_pair_load(const char *path, enum WsScheme scheme, struct WsMeshPair **out);

/**
 * Cells of the density mesh, 0 for a null handle.
 *
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t ws_mesh_pair_density_cells(const struct WsMeshPair *pair);

/**
 * Cells of the potential mesh, 0 for a null handle.
 *
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t ws_mesh_pair_potential_cells(const struct WsMeshPair *pair);

/**
 * Areas of the density cells.
 *
 * # Safety
 * `pair` must be a live handle and `buf` writable for `len` doubles.
 */
enum WsStatus ws_mesh_pair_density_areas(const struct WsMeshPair *pair, double *buf, size_t len);

/**
 * # Safety
 * `pair` must be null or a handle not yet freed.
 */
void ws_mesh_pair_free(struct WsMeshPair *pair);

/**
 * Problem with user densities on the density mesh; `len` must equal its
 * cell count and both densities must carry the same mass. The pair is
 * copied, so it may be freed afterwards.
 *
 * # Safety
 * `pair` must be a live handle, `rho_in`/`rho_f` readable for `len`
 * doubles, `out` a valid handle slot.
 */
enum WsStatus ws_problem_new(const struct WsMeshPair *pair,
                             size_t steps,
                             enum WsReconstruction kind,
                             const double *rho_in,
                             const double *rho_f,
                             size_t len,
                             struct WsProblem **out);

/**
 * Problem for a built-in case (`translation`, `compression`, `sinusoidal`,
 * `cross`) on the generated mesh of size `hbar`. `c` is the compression
 * factor and is ignored by the other cases.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum WsStatus ws_problem_from_case(const char *name,
                                   double c,
                                   enum WsScheme scheme,
                                   enum WsReconstruction kind,
                                   double hbar,
                                   size_t steps,
                                   struct WsProblem **out);

/**
 * Interior time steps of the problem, 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t ws_problem_steps(const struct WsProblem *problem);

/**
 * # Safety
 * `problem` must be null or a handle not yet freed.
 */
void ws_problem_free(struct WsProblem *problem);

/**
 * Runs the barrier method. `params` may be null for the defaults. A
 * solution is returned in `out` also when the status is
 * `WS_STATUS_NOT_CONVERGED`; it must be freed in both cases.
 *
 * # Safety
 * `problem` must be a live handle, `params` null or readable, `out` a
 * valid handle slot.
 */
enum WsStatus ws_solve(const struct WsProblem *problem,
                       const struct WsSolverParams *params,
                       struct WsSolution **out);

/**
 * Discrete distance, NaN for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
double ws_solution_w2(const struct WsSolution *sol);

/**
 * Barrier weight of the returned iterate, NaN for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
double ws_solution_mu(const struct WsSolution *sol);

/**
 * # Safety
 * `sol` must be null or a live handle.
 */
bool ws_solution_converged(const struct WsSolution *sol);

/**
 * Outer iterations, rejected ones included.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
size_t ws_solution_outer_iterations(const struct WsSolution *sol);

/**
 * Density at time `k / (steps + 1)` for `k` in `0..=steps + 1`.
 *
 * # Safety
 * `sol` must be a live handle and `buf` writable for `len` doubles.
 */
enum WsStatus ws_solution_density(const struct WsSolution *sol, size_t k, double *buf, size_t len);

/**
 * Potential on the time interval `k` for `k` in `1..=steps + 1`.
 *
 * # Safety
 * `sol` must be a live handle and `buf` writable for `len` doubles.
 */
enum WsStatus ws_solution_potential(const struct WsSolution *sol,
                                    size_t k,
                                    double *buf,
                                    size_t len);

/**
 * # Safety
 * `sol` must be null or a handle not yet freed.
 */
void ws_solution_free(struct WsSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WASSERSOLVE_H */
