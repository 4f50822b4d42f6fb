#ifndef FLEXWAVE_H
#define FLEXWAVE_H

#include <stddef.h>

#if defined(FLEXWAVE_BUILDING_LIBRARY)
#define FW_API __attribute__((visibility("default")))
#else
#define FW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fw_status {
  FW_OK = 0,
  FW_ERR_DOMAIN = 1,
  FW_ERR_CONFIG = 2,
  FW_ERR_SOLVER = 3,
  FW_ERR_VALIDATION = 4,
  FW_ERR_IO = 5,
  FW_ERR_NULL_ARGUMENT = 6,
  FW_ERR_BUFFER_TOO_SMALL = 7,
  FW_ERR_INTERNAL = 8
} fw_status;

typedef struct fw_context fw_context;
typedef struct fw_result fw_result;
typedef struct fw_sweep fw_sweep;

/* Message of the last failed call on this thread; "" after a success. */
FW_API const char* fw_last_error(void);
FW_API const char* fw_status_name(fw_status status);
FW_API const char* fw_version(void);
/* 16 hex digit FNV-1a hash of the compact dump of a JSON document. */
FW_API fw_status fw_config_hash(const char* json, char** out);
/* Releases strings returned through char** out-parameters. */
FW_API void fw_string_free(char* s);

FW_API fw_status fw_context_from_k0(double k0, fw_context** out);
FW_API fw_status fw_context_from_gamma(double gamma, fw_context** out);
FW_API void fw_context_free(fw_context* ctx);
FW_API fw_status fw_context_params(const fw_context* ctx, double* gamma, double* k0, double* nu0);
FW_API fw_status fw_coefficients_json(const fw_context* ctx, char** out);

/* nu(k) for each of the n wavenumbers. */
FW_API fw_status fw_dispersion(const fw_context* ctx, const double* k, size_t n, double* nu_out);
FW_API fw_status fw_focussing_threshold(double* k0_star, double* gamma_star);
/* zeta_NLS(x) = amplitude sech(rate x); FW_ERR_DOMAIN in the defocussing regime. */
FW_API fw_status fw_soliton_params(const fw_context* ctx, double* amplitude, double* rate);
FW_API fw_status fw_zeta_nls(const fw_context* ctx, const double* x, size_t n, double* out);
FW_API fw_status fw_soliton_residual(const fw_context* ctx, double half_length, size_t n_points,
                                     double* residual);

/* config_json: a minimisation config object (may be NULL or "{}" for defaults).
   fw_minimize_from uses the profile eta[0..n) on [-half_length, half_length) as the seed. */
FW_API fw_status fw_minimize(const fw_context* ctx, const char* config_json, fw_result** out);
FW_API fw_status fw_minimize_from(const fw_context* ctx, const char* config_json, const double* eta,
                                  size_t n, double half_length, fw_result** out);
FW_API void fw_result_free(fw_result* res);
FW_API fw_status fw_result_report_json(const fw_result* res, char** out);
/* With x and eta NULL, stores the point count in *n. Otherwise *n is the buffer capacity. */
FW_API fw_status fw_result_profile(const fw_result* res, double* x, double* eta, size_t* n);
FW_API fw_status fw_result_write_csv(const fw_result* res, const char* path, const char* header_comment);

/* Continuation over mu[0..n_mu) in the given order; per-member failures are recorded. */
FW_API fw_status fw_sweep_run(const fw_context* ctx, const double* mu, size_t n_mu, const char* config_json,
                              fw_sweep** out);
FW_API void fw_sweep_free(fw_sweep* sweep);
FW_API size_t fw_sweep_size(const fw_sweep* sweep);
FW_API fw_status fw_sweep_entry_json(const fw_sweep* sweep, size_t i, char** out);
/* Copy of member i; FW_ERR_SOLVER when that member failed. */
FW_API fw_status fw_sweep_entry_result(const fw_sweep* sweep, size_t i, fw_result** out);

/* study: threshold, nls_limits, test_function, speed_law, profile_convergence,
   quartic_asymptotics, subadditivity, box_robustness or all. Reports are written
   under out_dir when it is non-NULL; *out receives the JSON report (an array for
   all) and *passed whether every check passed. */
FW_API fw_status fw_study_run(const char* study, const char* config_json, const char* out_dir, char** out,
                              int* passed);

#ifdef __cplusplus
}
#endif

#endif
