/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef LQG_LANDSCAPE_H
#define LQG_LANDSCAPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum LqgStatus {
  LQG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  LQG_STATUS_NULL_POINTER = 1,
  /**
   * Inputs are malformed or violate a documented invariant.
   */
  LQG_STATUS_VALIDATION = 2,
  /**
   * The problem is well posed but the computation failed, for example
   * because the controller does not stabilize the plant.
   */
  LQG_STATUS_NUMERICAL = 3,
  LQG_STATUS_NO_PATH_FOUND = 4,
  /**
   * A panic was caught at the boundary.
   */
  LQG_STATUS_PANIC = 5,
} LqgStatus;

/**
 * Classification returned by [`lqg_analyze_stationary`].
 */
typedef enum LqgVerdict {
  LQG_VERDICT_GLOBAL_OPTIMUM = 0,
  LQG_VERDICT_NON_MINIMAL_STATIONARY = 1,
  LQG_VERDICT_NOT_STATIONARY = 2,
  LQG_VERDICT_INCONCLUSIVE = 3,
} LqgVerdict;

/**
 * Opaque controller handle.
 */
typedef struct LqgController LqgController;

/**
 * Opaque plant handle.
 */
typedef struct LqgPlant LqgPlant;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a plant from row-major matrices. `discrete` selects the time domain.
 */
enum LqgStatus lqg_plant_new(size_t n,
                             size_t m,
                             size_t p,
                             const double *a,
                             const double *b,
                             const double *c,
                             const double *w,
                             const double *v,
                             const double *q,
                             const double *r,
                             bool discrete,
                             struct LqgPlant **plant_out);

/**
 * Parses a plant from a NUL-terminated JSON document.
 */
enum LqgStatus lqg_plant_from_json(const char *json, struct LqgPlant **plant_out);

/**
 * Releases a plant; null is ignored.
 */
void lqg_plant_free(struct LqgPlant *plant);

/**
 * State, input and output dimensions of a plant.
 */
enum LqgStatus lqg_plant_dims(const struct LqgPlant *plant, size_t *n, size_t *m, size_t *p);

/**
 * Builds a strictly proper controller of order `q` with `m` outputs and
 * `p` inputs.
 */
enum LqgStatus lqg_controller_new(size_t q,
                                  size_t m,
                                  size_t p,
                                  const double *a_k,
                                  const double *b_k,
                                  const double *c_k,
                                  struct LqgController **controller_out);

/**
 * Releases a controller; null is ignored.
 */
void lqg_controller_free(struct LqgController *controller);

/**
 * Order, output count and input count of a controller.
 */
enum LqgStatus lqg_controller_dims(const struct LqgController *controller,
                                   size_t *q,
                                   size_t *m,
                                   size_t *p);

/**
 * Copies the controller matrices into caller buffers of sizes q×q, q×p
 * and m×q.
 */
enum LqgStatus lqg_controller_get(const struct LqgController *controller,
                                  double *a_k,
                                  double *b_k,
                                  double *c_k);

/**
 * Riccati-optimal full-order controller and its cost. `cost_out` may be null.
 */
enum LqgStatus lqg_riccati_controller(const struct LqgPlant *plant,
                                      struct LqgController **controller_out,
                                      double *cost_out);

/**
 * LQG cost of a stabilizing controller.
 */
enum LqgStatus lqg_cost(const struct LqgPlant *plant,
                        const struct LqgController *controller,
                        double *cost_out);

/**
 * Gradient blocks written into buffers shaped like `A_K`, `B_K`, `C_K`,
 * and the Frobenius norm of the whole gradient (`norm_out` may be null).
 */
enum LqgStatus lqg_gradient(const struct LqgPlant *plant,
                            const struct LqgController *controller,
                            double *grad_a,
                            double *grad_b,
                            double *grad_c,
                            double *norm_out);

/**
 * Whether the closed loop is stable, with its stability margin (largest
 * real part, or spectral radius minus one in discrete time). `margin_out`
 * may be null.
 */
enum LqgStatus lqg_is_stabilizing(const struct LqgPlant *plant,
                                  const struct LqgController *controller,
                                  bool *stable_out,
                                  double *margin_out);

/**
 * Classifies a stabilizing full-order controller; `tol` is the gradient
 * norm treated as zero.
 */
enum LqgStatus lqg_analyze_stationary(const struct LqgPlant *plant,
                                      const struct LqgController *controller,
                                      double tol,
                                      enum LqgVerdict *verdict_out);

/**
 * Sign (+1 or -1) of the determinant of the lifted similarity factor of a
 * full-order controller. Controllers with different signs cannot be joined
 * without passing through a reduced-order controller.
 */
enum LqgStatus lqg_component_sign(const struct LqgPlant *plant,
                                  const struct LqgController *controller,
                                  int32_t *sign_out);

/**
 * Message of the last failed call on this thread (empty after a success).
 * The pointer stays valid until the next call on the same thread.
 */
const char *lqg_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *lqg_status_string(enum LqgStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LQG_LANDSCAPE_H */
