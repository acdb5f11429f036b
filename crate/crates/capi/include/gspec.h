#ifndef GSPEC_H
#define GSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum GspecStatus {
  GspecStatus_Ok = 0,
  /**
   * Model file failed schema validation.
   */
  GspecStatus_Schema = 1,
  /**
   * Numeric or structural failure.
   */
  GspecStatus_Numeric = 2,
  /**
   * Result is inconclusive at the materialized scale.
   */
  GspecStatus_Inconclusive = 3,
  /**
   * A required pointer argument was null.
   */
  GspecStatus_NullArgument = 4,
} GspecStatus;

/**
 * Opaque handle: a finite point cloud in the complex plane.
 */
typedef struct GspecCloud GspecCloud;

/**
 * Opaque handle: a loaded scenario with its computation options.
 */
typedef struct GspecModel GspecModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; valid until the next
 * failing call.
 */
const char *gspec_last_error(void);

/**
 * Load a model file (TOML) from a path.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. The returned handle must be released with `gspec_model_free`.
 */
enum GspecStatus gspec_model_load(const char *path, struct GspecModel **out);

/**
 * Load a model from TOML text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be valid.
 */
enum GspecStatus gspec_model_load_str(const char *text, struct GspecModel **out);

/**
 * # Safety
 * `model` must come from a load call and not have been freed.
 */
void gspec_model_free(struct GspecModel *model);

/**
 * Scenario name; borrowed pointer valid while the model lives.
 *
 * # Safety
 * `model` must be a live handle.
 */
const char *gspec_model_name(const struct GspecModel *model);

/**
 * Essential spectrum via the boundary-formula decomposition.
 *
 * # Safety
 * `model` must be live; `out` valid. Free the cloud with `gspec_cloud_free`.
 */
enum GspecStatus gspec_essential_boundary(const struct GspecModel *model, struct GspecCloud **out);

/**
 * Essential spectrum via the filtered truncation oracle (Hermitian models).
 *
 * # Safety
 * As for `gspec_essential_boundary`.
 */
enum GspecStatus gspec_essential_truncation(const struct GspecModel *model,
                                            struct GspecCloud **out);

/**
 * Eigenvalue cloud of one truncation window.
 *
 * # Safety
 * As for `gspec_essential_boundary`.
 */
enum GspecStatus gspec_spectrum_window(const struct GspecModel *model,
                                       uintptr_t window,
                                       struct GspecCloud **out);

/**
 * Fredholm verdict for H - lambda: writes 1 (Fredholm) or 0 plus the margin
 * (distance of lambda to the essential-spectrum cloud).
 *
 * # Safety
 * `model` live; `verdict` and `margin` valid pointers.
 */
enum GspecStatus gspec_fredholm(const struct GspecModel *model,
                                double lambda_re,
                                double lambda_im,
                                int *verdict,
                                double *margin);

/**
 * Number of points in a cloud.
 *
 * # Safety
 * `cloud` must be a live handle.
 */
uintptr_t gspec_cloud_len(const struct GspecCloud *cloud);

/**
 * Read point `index` of a cloud.
 *
 * # Safety
 * `cloud` live; `re`/`im` valid pointers.
 */
enum GspecStatus gspec_cloud_get(const struct GspecCloud *cloud,
                                 uintptr_t index,
                                 double *re,
                                 double *im);

/**
 * Symmetric Hausdorff distance between two clouds.
 *
 * # Safety
 * Both clouds live; `out` valid.
 */
enum GspecStatus gspec_hausdorff(const struct GspecCloud *a,
                                 const struct GspecCloud *b,
                                 double *out);

/**
 * # Safety
 * `cloud` must come from this library and not have been freed.
 */
void gspec_cloud_free(struct GspecCloud *cloud);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSPEC_H */
