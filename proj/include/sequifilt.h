/* sequifilt C API: sequential Bayesian parameter filtering.
 *
 * All entry points return a status code; on failure sqf_last_error() holds a
 * thread-local message describing what went wrong. Handles are opaque and
 * must be released with the matching *_close function.
 */
#ifndef SEQUIFILT_H
#define SEQUIFILT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SQF_API __declspec(dllexport)
#else
#define SQF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define SQF_OK 0
#define SQF_ERROR 1       /* unexpected internal failure */
#define SQF_ERR_CONFIG 2  /* invalid configuration or input data */
#define SQF_ERR_NUMERIC 3 /* numerical failure or oracle mismatch */

typedef struct sqf_config sqf_config;
typedef struct sqf_result sqf_result;

/* Library version string, e.g. "1.0.0". */
SQF_API const char* sqf_version(void);

/* Message for the most recent failure on this thread ("" if none). */
SQF_API const char* sqf_last_error(void);

/* --- configuration ------------------------------------------------------ */

/* Parse a JSON config file. On success *out owns a new handle. */
SQF_API int sqf_config_open(const char* path, sqf_config** out);

/* Parse config from a JSON string; relative paths resolve against base_dir
 * (may be NULL for the current directory). */
SQF_API int sqf_config_parse(const char* json_text, const char* base_dir,
                     sqf_config** out);

SQF_API int sqf_config_set_seed(sqf_config* config, uint64_t seed);
SQF_API int sqf_config_set_particles(sqf_config* config, size_t particles);
SQF_API int sqf_config_set_threads(sqf_config* config, int threads);
/* algorithm: "sis" or "smc". */
SQF_API int sqf_config_set_algorithm(sqf_config* config, const char* algorithm);
/* Replace the measurement data file list with a single path. */
SQF_API int sqf_config_set_data_path(sqf_config* config, const char* path);
SQF_API int sqf_config_set_output_dir(sqf_config* config, const char* path);

SQF_API void sqf_config_close(sqf_config* config);

/* --- runs --------------------------------------------------------------- */

/* Run the configured filter (SIS or SMC). */
SQF_API int sqf_run_filter(const sqf_config* config, sqf_result** out);

/* Long random-walk Metropolis reference chain over the full posterior. */
SQF_API int sqf_run_mcmc_reference(const sqf_config* config, int n_samples,
                           int burn_in, sqf_result** out);

/* Repeat the filter across particle counts and fit the variance decay. */
SQF_API int sqf_run_convergence(const sqf_config* config,
                        const size_t* particle_counts, size_t n_counts,
                        int repetitions, sqf_result** out);

/* Monte Carlo calibration of the angle-noise variance (pendulum only). */
SQF_API int sqf_run_noise_calibration(const sqf_config* config, int n_mc,
                              sqf_result** out);

/* Filter a gaussian-mean problem and compare every step with the analytic
 * posterior. Returns SQF_ERR_NUMERIC when the check fails. */
SQF_API int sqf_run_oracle_check(const sqf_config* config, sqf_result** out);

/* --- results ------------------------------------------------------------ */

/* Write summary.json and the applicable CSV artifacts into outdir. A NULL
 * outdir uses the output directory from the run's configuration. */
SQF_API int sqf_result_write(const sqf_result* result, const char* outdir);

/* Number of filter steps recorded (0 when the run has no trace). */
SQF_API size_t sqf_result_step_count(const sqf_result* result);

/* Per-step record; any output pointer may be NULL. resampled is 0/1. */
SQF_API int sqf_result_step(const sqf_result* result, size_t index, double* ess,
                    int* resampled, double* log_evidence_increment,
                    double* posterior_mean, double* posterior_variance);

/* Cumulative log-evidence of the trace. */
SQF_API int sqf_result_log_evidence(const sqf_result* result, double* out);

/* Number of steps that triggered resampling. */
SQF_API int sqf_result_resample_count(const sqf_result* result, size_t* out);

/* Oracle-check run only: worst absolute deviation of the filter posterior
 * mean / variance from the analytic values across all steps. */
SQF_API int sqf_result_oracle_errors(const sqf_result* result,
                                     double* max_mean_error,
                                     double* max_variance_error);

SQF_API void sqf_result_close(sqf_result* result);

#ifdef __cplusplus
}
#endif

#endif /* SEQUIFILT_H */
