#ifndef FARSPLIT_H
#define FARSPLIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_DOMAIN = 2,
  FS_STATUS_PRECONDITION = 3,
  FS_STATUS_LENGTH_MISMATCH = 4,
  FS_STATUS_GEOMETRY = 5,
  FS_STATUS_SINGULAR = 6,
  FS_STATUS_PARSE = 7,
  FS_STATUS_IO = 8,
  FS_STATUS_PANIC = 9,
} FsStatus;

// Sampled far field on an equidistant grid.
typedef struct FsFarField FsFarField;

// Parsed and validated scene.
typedef struct FsScene FsScene;

// Result of a split or completion.
typedef struct FsSolution FsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *fs_last_error_message(void);

// # Safety
// `s` must come from this library (or be NULL) and not be freed twice.
void fs_string_free(char *s);

// # Safety
// `out_value` must be a valid pointer.
enum FsStatus fs_squared_singular_value(int64_t n, double r, double *out_value);

// Writes the number of non-evanescent modes to `out_n`; `out_found` is 0 when
// no mode reaches the level.
//
// # Safety
// Output pointers must be valid.
enum FsStatus fs_picard_threshold(double r, double ratio, uint64_t *out_n, int32_t *out_found);

// # Safety
// `re` and `im` must point to `size` doubles; `out_field` must be valid.
enum FsStatus fs_farfield_from_samples(uintptr_t size,
                                       const double *re,
                                       const double *im,
                                       struct FsFarField **out_field);

// # Safety
// `field` must be a live handle.
enum FsStatus fs_farfield_size(const struct FsFarField *field, uintptr_t *out_size);

// Copies grid samples into `re`/`im`, each of length `len` (the grid size).
//
// # Safety
// `field` must be a live handle; arrays must hold `len` doubles.
enum FsStatus fs_farfield_samples(const struct FsFarField *field,
                                  double *re,
                                  double *im,
                                  uintptr_t len);

// # Safety
// `field` must be a live handle; arrays must hold `len` doubles.
enum FsStatus fs_farfield_coeffs(const struct FsFarField *field,
                                 double *re,
                                 double *im,
                                 uintptr_t len);

// # Safety
// `field` must come from this library (or be NULL).
void fs_farfield_free(struct FsFarField *field);

// # Safety
// `json` must be a NUL-terminated string; `out_scene` must be valid.
enum FsStatus fs_scene_from_json(const char *json, struct FsScene **out_scene);

// # Safety
// `scene` must come from this library (or be NULL).
void fs_scene_free(struct FsScene *scene);

// Measured data `gamma` of the scene (masked, with noise).
//
// # Safety
// `scene` must be a live handle; `out_gamma` must be valid.
enum FsStatus fs_scene_gamma(const struct FsScene *scene, struct FsFarField **out_gamma);

// Least-squares split using the scene's centers, orders and missing arc.
//
// # Safety
// Handles must be live; `out_solution` must be valid.
enum FsStatus fs_split_ls(const struct FsScene *scene,
                          const struct FsFarField *gamma,
                          struct FsSolution **out_solution);

// Basis-pursuit split. `band` nonzero restricts windows to the scene orders;
// `auto_weights` nonzero uses distance-based weights.
//
// # Safety
// Handles must be live; `out_solution` must be valid.
enum FsStatus fs_split_l1(const struct FsScene *scene,
                          const struct FsFarField *gamma,
                          double mu,
                          uintptr_t max_iters,
                          double tol,
                          int32_t band,
                          int32_t auto_weights,
                          struct FsSolution **out_solution);

// # Safety
// `solution` must come from this library (or be NULL).
void fs_solution_free(struct FsSolution *solution);

// # Safety
// `solution` must be a live handle.
enum FsStatus fs_solution_component_count(const struct FsSolution *solution, uintptr_t *out_count);

// Window order `N_i` of component `i`; its coefficient arrays have `2N_i+1` entries.
//
// # Safety
// `solution` must be a live handle.
enum FsStatus fs_solution_order(const struct FsSolution *solution,
                                uintptr_t index,
                                uintptr_t *out_order);

// Coefficients of component `index`, ordered from `-N_i` to `N_i`.
//
// # Safety
// `solution` must be a live handle; arrays must hold `len` doubles.
enum FsStatus fs_solution_coefficients(const struct FsSolution *solution,
                                       uintptr_t index,
                                       double *re,
                                       double *im,
                                       uintptr_t len);

// Far field restored on the missing arc (zero elsewhere).
//
// # Safety
// `solution` must be a live handle; `out_field` must be valid.
enum FsStatus fs_solution_restored(const struct FsSolution *solution,
                                   struct FsFarField **out_field);

// Residual and condition number (NaN when not computed).
//
// # Safety
// `solution` must be a live handle; outputs must be valid.
enum FsStatus fs_solution_diagnostics(const struct FsSolution *solution,
                                      double *out_residual,
                                      double *out_condition);

// Solution as JSON; free with [`fs_string_free`].
//
// # Safety
// `solution` must be a live handle; `out_json` must be valid.
enum FsStatus fs_solution_to_json(const struct FsSolution *solution, char **out_json);

// Evaluates one stability estimate. `geometry_json` holds `k`, `centers` and
// optionally `orders`, `l0`, `omega_measure`. `conservative` nonzero selects
// the conservative sign variant. Writes the largest constant, the bound and
// whether all hypotheses hold.
//
// # Safety
// Strings must be NUL-terminated; outputs must be valid.
enum FsStatus fs_evaluate_bound(const char *theorem,
                                const char *geometry_json,
                                double value,
                                int32_t conservative,
                                double *out_constant,
                                double *out_rhs,
                                int32_t *out_feasible);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FARSPLIT_H */
