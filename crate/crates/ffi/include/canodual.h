#ifndef CANODUAL_H
#define CANODUAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_ARGUMENT = 2,
  CD_STATUS_PARSE = 3,
  CD_STATUS_INVALID_INSTANCE = 4,
  CD_STATUS_DIMENSION_MISMATCH = 5,
  CD_STATUS_NUMERICAL = 6,
  CD_STATUS_NOT_DIAGONAL = 7,
  CD_STATUS_TOO_LARGE = 8,
  CD_STATUS_BUFFER_TOO_SMALL = 9,
  CD_STATUS_NOT_APPLICABLE = 10,
  CD_STATUS_PANIC = 99,
} CdStatus;

typedef enum CdCertificate {
  CD_CERTIFICATE_GLOBAL_OPTIMAL = 0,
  CD_CERTIFICATE_KKT_ONLY = 1,
  CD_CERTIFICATE_FAILED = 2,
} CdCertificate;

// Opaque problem instance.
typedef struct CdInstance CdInstance;

// Opaque solve report.
typedef struct CdReport CdReport;

typedef struct CdSolverConfig {
  double grad_tol;
  double barrier_mu0;
  double barrier_shrink;
  uint32_t max_outer;
  uint32_t max_inner;
  double gap_tol;
  uint64_t seed;
} CdSolverConfig;

typedef struct CdOracleConfig {
  uint32_t n_starts;
  uint32_t grid_per_dim;
  double descent_tol;
  uint32_t max_n;
  uint64_t seed;
} CdOracleConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The string
// stays valid until the next call into this library on the same thread.
const char *cd_last_error_message(void);

// Releases a string returned by [`cd_report_to_json`].
//
// # Safety
// `s` must be NULL or a pointer obtained from this library that has not
// been freed.
void cd_string_free(char *s);

struct CdSolverConfig cd_solver_config_default(void);

struct CdOracleConfig cd_oracle_config_default(void);

// Parses a JSON problem file.
//
// # Safety
// `json` must be a NUL-terminated string and `out_instance` a valid
// pointer.
enum CdStatus cd_instance_from_json(const char *json, struct CdInstance **out_instance);

// Builds an instance from dense row-major `n x n` matrices.
//
// # Safety
// `a` and `b` must point to `n*n` doubles, `c` and `f` to `n` doubles.
enum CdStatus cd_instance_new(size_t n,
                              const double *a,
                              const double *b,
                              double alpha,
                              const double *c,
                              const double *f,
                              struct CdInstance **out_instance);

// # Safety
// `inst` must be a live instance and `out_n` a valid pointer.
enum CdStatus cd_instance_dim(const struct CdInstance *inst, size_t *out_n);

// # Safety
// `inst` must be NULL or a live instance; it is invalid afterwards.
void cd_instance_free(struct CdInstance *inst);

// Primal objective at `(x, v)`.
//
// # Safety
// `x` and `v` must point to `n` doubles where `n` is the instance
// dimension.
enum CdStatus cd_evaluate_primal(const struct CdInstance *inst,
                                 const double *x,
                                 const double *v,
                                 double *out_value);

// Runs the dual solver. `config` may be NULL for defaults.
//
// # Safety
// `inst` must be a live instance, `config` NULL or valid, `out_report` a
// valid pointer.
enum CdStatus cd_solve(const struct CdInstance *inst,
                       const struct CdSolverConfig *config,
                       struct CdReport **out_report);

// # Safety
// `report` must be NULL or a live report; it is invalid afterwards.
void cd_report_free(struct CdReport *report);

// # Safety
// `report` must be a live report and `out_value` a valid pointer.
enum CdStatus cd_report_certificate(const struct CdReport *report, enum CdCertificate *out_value);

// # Safety
// `report` must be a live report and `out_value` a valid pointer.
enum CdStatus cd_report_dual_value(const struct CdReport *report, double *out_value);

// # Safety
// `report` must be a live report and `out_value` a valid pointer.
enum CdStatus cd_report_primal_value(const struct CdReport *report, double *out_value);

// Primal minus dual value.
//
// # Safety
// `report` must be a live report and `out_value` a valid pointer.
enum CdStatus cd_report_gap(const struct CdReport *report, double *out_value);

// Smallest eigenvalue of `G` at the dual optimum.
//
// # Safety
// `report` must be a live report and `out_value` a valid pointer.
enum CdStatus cd_report_lambda_min(const struct CdReport *report, double *out_value);

// # Safety
// `report` must be a live report and `out_value` a valid pointer.
enum CdStatus cd_report_sigma0(const struct CdReport *report, double *out_value);

// # Safety
// `report` must be a live report and `buf` must hold `len` doubles.
enum CdStatus cd_report_copy_sigma1(const struct CdReport *report, double *buf, size_t len);

// # Safety
// `report` must be a live report and `buf` must hold `len` doubles.
enum CdStatus cd_report_copy_sigma2(const struct CdReport *report, double *buf, size_t len);

// # Safety
// `report` must be a live report and `buf` must hold `len` doubles.
enum CdStatus cd_report_copy_x(const struct CdReport *report, double *buf, size_t len);

// # Safety
// `report` must be a live report and `buf` must hold `len` doubles.
enum CdStatus cd_report_copy_v(const struct CdReport *report, double *buf, size_t len);

// Serializes the report as JSON. Release the string with
// [`cd_string_free`].
//
// # Safety
// `report` must be a live report and `out_json` a valid pointer.
enum CdStatus cd_report_to_json(const struct CdReport *report, char **out_json);

// Brute-force minimum over all binary `v`. `config` may be NULL.
//
// # Safety
// `x_out` and `v_out` must hold `len` doubles; other pointers must be
// valid.
enum CdStatus cd_oracle_solve(const struct CdInstance *inst,
                              const struct CdOracleConfig *config,
                              double *x_out,
                              double *v_out,
                              size_t len,
                              double *out_value);

// Closed-form solution of a diagonal instance. Returns
// [`CdStatus::NotApplicable`] when its sign conditions fail.
//
// # Safety
// `x_out` and `v_out` must hold `len` doubles; other pointers must be
// valid.
enum CdStatus cd_decoupled_solve(const struct CdInstance *inst,
                                 double *x_out,
                                 double *v_out,
                                 size_t len,
                                 double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CANODUAL_H */
