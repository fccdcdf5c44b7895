/* Generated by cbindgen from crates/ffi; do not edit. */

#ifndef IGEO_H
#define IGEO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum IgeoStatus {
  IGEO_STATUS_OK = 0,
  IGEO_STATUS_NULL_POINTER = 1,
  IGEO_STATUS_INVALID_UTF8 = 2,
  IGEO_STATUS_SCHEMA = 3,
  IGEO_STATUS_UNKNOWN_SYMBOL = 4,
  IGEO_STATUS_OUT_OF_DOMAIN = 5,
  IGEO_STATUS_DIMENSION_MISMATCH = 6,
  IGEO_STATUS_BUFFER_TOO_SMALL = 7,
  IGEO_STATUS_NUMERICAL = 8,
  IGEO_STATUS_DEGENERATE = 9,
  IGEO_STATUS_PANIC = 10,
} IgeoStatus;

typedef struct IgeoFamily IgeoFamily;

typedef struct IgeoModel IgeoModel;

typedef struct IgeoSurface IgeoSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Owned by the library.
const char *igeo_last_error(void);

// Library version, a static string.
const char *igeo_version(void);

// Releases a string returned by the library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void igeo_string_free(char *s);

// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum IgeoStatus igeo_model_builtin(const char *name, struct IgeoModel **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum IgeoStatus igeo_model_from_json(const char *json, struct IgeoModel **out);

// Parameter dimension, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t igeo_model_dim(const struct IgeoModel *model);

// # Safety
// `model` must be null or a handle not yet freed.
void igeo_model_free(struct IgeoModel *model);

// Fisher metric at `theta` into `out` (`n*n` entries).
//
// # Safety
// `theta` must hold `len` values and `out` `out_len` writable values.
enum IgeoStatus igeo_fisher_metric(const struct IgeoModel *model,
                                   const double *theta,
                                   size_t len,
                                   double *out,
                                   size_t out_len);

// Lowered α-connection `Γ_ij,k` at `theta` into `out` (`n*n*n` entries).
//
// # Safety
// `theta` must hold `len` values and `out` `out_len` writable values.
enum IgeoStatus igeo_alpha_connection(const struct IgeoModel *model,
                                      const double *theta,
                                      size_t len,
                                      double alpha,
                                      double *out,
                                      size_t out_len);

// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum IgeoStatus igeo_surface_builtin(const char *name, struct IgeoSurface **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum IgeoStatus igeo_surface_from_json(const char *json, struct IgeoSurface **out);

// # Safety
// `surface` must be null or a live handle.
size_t igeo_surface_dim(const struct IgeoSurface *surface);

// # Safety
// `surface` must be null or a handle not yet freed.
void igeo_surface_free(struct IgeoSurface *surface);

// Induced connection (`n³`), affine fundamental form (`n²`), shape operator
// `S[k*n + i]` (`n²`) and transversal form (`n`) at `u`. Each output may be
// null to skip it; non-null outputs hold at least the listed size.
//
// # Safety
// `u` must hold `len` values; each non-null output must be writable for its size.
enum IgeoStatus igeo_decompose(const struct IgeoSurface *surface,
                               const double *u,
                               size_t len,
                               double *gamma,
                               double *h,
                               double *shape,
                               double *alpha);

// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum IgeoStatus igeo_family_builtin(const char *name, struct IgeoFamily **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum IgeoStatus igeo_family_from_json(const char *json, struct IgeoFamily **out);

// # Safety
// `family` must be null or a live handle.
size_t igeo_family_dim(const struct IgeoFamily *family);

// # Safety
// `family` must be null or a handle not yet freed.
void igeo_family_free(struct IgeoFamily *family);

// Potential `K(θ)`.
//
// # Safety
// `theta` must hold `len` values; `out` must be writable.
enum IgeoStatus igeo_family_potential(const struct IgeoFamily *family,
                                      const double *theta,
                                      size_t len,
                                      double *out);

// Dual coordinates `η = ∇K(θ)` into `out` (`n` entries).
//
// # Safety
// `theta` must hold `len` values and `out` `out_len` writable values.
enum IgeoStatus igeo_family_dual_coords(const struct IgeoFamily *family,
                                        const double *theta,
                                        size_t len,
                                        double *out,
                                        size_t out_len);

// Natural parameters for dual coordinates `eta` into `out` (`n` entries).
//
// # Safety
// `eta` must hold `len` values and `out` `out_len` writable values.
enum IgeoStatus igeo_family_invert_dual(const struct IgeoFamily *family,
                                        const double *eta,
                                        size_t len,
                                        double *out,
                                        size_t out_len);

// Runs a verification spec (or suite). On `IGEO_STATUS_OK`, `report_json`
// receives the report (free with `igeo_string_free`) and `exit_code` the
// command-line exit code: 0 when nothing failed, 1 otherwise.
//
// # Safety
// `spec_json` must be a NUL-terminated string; outputs must be writable.
enum IgeoStatus igeo_verify(const char *spec_json, char **report_json, int32_t *exit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IGEO_H */
