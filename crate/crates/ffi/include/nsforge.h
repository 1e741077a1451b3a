#ifndef NSFORGE_H
#define NSFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum NsfStatus {
  NSF_STATUS_OK = 0,
  NSF_STATUS_NULL_POINTER = 1,
  NSF_STATUS_INVALID_ARGUMENT = 2,
  NSF_STATUS_NUMERICAL = 3,
  NSF_STATUS_IO = 4,
  NSF_STATUS_PANIC = 5,
  NSF_STATUS_BUFFER_TOO_SMALL = 6,
} NsfStatus;

/*
 A spectral field (scalar, vector or symmetric tensor).
 */
typedef struct NsfField NsfField;

/*
 A finished iteration: its report and final state.
 */
typedef struct NsfRun NsfRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *nsf_version(void);

/*
 Message of the last failure on this thread. Returns the size needed
 including the NUL; copies when `buf` holds that many bytes.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
uintptr_t nsf_last_error(char *buf, uintptr_t len);

/*
 Read a `.sf2` file.

 # Safety
 `path` must be a NUL-terminated string, `out` a valid pointer.
 */
enum NsfStatus nsf_field_load(const char *path, struct NsfField **out);

/*
 Write a field as `.sf2`.

 # Safety
 `field` must come from this library, `path` be NUL-terminated.
 */
enum NsfStatus nsf_field_save(const struct NsfField *field, const char *path);

/*
 `u_0 = amp sin(2 pi x2) e1`.

 # Safety
 `out` must be a valid pointer.
 */
enum NsfStatus nsf_base_velocity(double amp, struct NsfField **out);

/*
 The base Reynolds stress for amplitude `amp`.

 # Safety
 `out` must be a valid pointer.
 */
enum NsfStatus nsf_base_stress(double amp, struct NsfField **out);

/*
 Grid size, component count (1, 2 or 3) and sup-norm bandwidth.

 # Safety
 `field` must come from this library; outputs may be null.
 */
enum NsfStatus nsf_field_info(const struct NsfField *field,
                              uintptr_t *grid,
                              uintptr_t *components,
                              uintptr_t *band);

/*
 Homogeneous Sobolev norm of order `s`.

 # Safety
 `field` must come from this library, `out` be valid.
 */
enum NsfStatus nsf_field_sobolev_norm(const struct NsfField *field, double s, double *out);

/*
 `L^p` norm, `p >= 1` or `INFINITY`.

 # Safety
 `field` must come from this library, `out` be valid.
 */
enum NsfStatus nsf_field_lp_norm(const struct NsfField *field, double p, double *out);

/*
 # Safety
 `field` must be null or come from this library, and not be used afterwards.
 */
void nsf_field_free(struct NsfField *field);

/*
 `gamma_k(R)^2` for the symmetric matrix `(r11, r12; r12, r22)`.

 # Safety
 `out` must point to 3 doubles.
 */
enum NsfStatus nsf_gamma_squared(double r11, double r12, double r22, double *out);

/*
 Run the iteration for a TOML configuration (empty string: defaults).
 Writes no files.

 # Safety
 `config_toml` must be NUL-terminated, `out` valid.
 */
enum NsfStatus nsf_run(const char *config_toml, struct NsfRun **out);

/*
 Overall pass flag and number of completed steps.

 # Safety
 `run` must come from this library; outputs may be null.
 */
enum NsfStatus nsf_run_summary(const struct NsfRun *run, int *pass, uint32_t *steps);

/*
 Frequency and `||R_{q}||_{H^-2}` after step `index` (0-based).

 # Safety
 `run` must come from this library; outputs may be null.
 */
enum NsfStatus nsf_run_step(const struct NsfRun *run,
                            uint32_t index,
                            uint64_t *lambda,
                            double *r_norm);

/*
 The report as JSON. Call with `buf = NULL, len = 0` to get the size.

 # Safety
 `run` must come from this library; `buf` null or `len` writable bytes.
 */
enum NsfStatus nsf_run_report_json(const struct NsfRun *run,
                                   char *buf,
                                   uintptr_t len,
                                   uintptr_t *needed);

/*
 Final velocity (`which = 0`) or Reynolds stress (`which = 1`) as a new field.

 # Safety
 `run` must come from this library, `out` valid.
 */
enum NsfStatus nsf_run_field(const struct NsfRun *run, int which, struct NsfField **out);

/*
 # Safety
 `run` must be null or come from this library, and not be used afterwards.
 */
void nsf_run_free(struct NsfRun *run);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NSFORGE_H */
