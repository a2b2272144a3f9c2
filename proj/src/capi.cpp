#include "sequifilt.h"

#include <cstring>
#include <string>

#include "sequifilt/errors.hpp"
#include "sequifilt/runner.hpp"

using namespace sequifilt;

struct sqf_config {
    RunConfig cfg;
};

struct sqf_result {
    RunOutput out;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SQF_OK;
    } catch (const ConfigError& e) {
        return fail(SQF_ERR_CONFIG, e.what());
    } catch (const NumericalError& e) {
        return fail(SQF_ERR_NUMERIC, e.what());
    } catch (const std::exception& e) {
        return fail(SQF_ERROR, e.what());
    } catch (...) {
        return fail(SQF_ERROR, "unknown error");
    }
}

int require(bool condition, const char* message) {
    return condition ? SQF_OK : fail(SQF_ERR_CONFIG, message);
}

}  // namespace

extern "C" {

const char* sqf_version(void) { return "1.0.0"; }

const char* sqf_last_error(void) { return g_last_error.c_str(); }

int sqf_config_open(const char* path, sqf_config** out) {
    if (int rc = require(path && out, "null argument")) return rc;
    return guarded([&] { *out = new sqf_config{RunConfig::from_file(path)}; });
}

int sqf_config_parse(const char* json_text, const char* base_dir,
                     sqf_config** out) {
    if (int rc = require(json_text && out, "null argument")) return rc;
    return guarded([&] {
        *out = new sqf_config{
            RunConfig::from_json_text(json_text, base_dir ? base_dir : ".")};
    });
}

int sqf_config_set_seed(sqf_config* config, uint64_t seed) {
    if (int rc = require(config != nullptr, "null config")) return rc;
    config->cfg.filter.seed = seed;
    return SQF_OK;
}

int sqf_config_set_particles(sqf_config* config, size_t particles) {
    if (int rc = require(config != nullptr, "null config")) return rc;
    if (int rc = require(particles >= 2, "particles must be >= 2")) return rc;
    config->cfg.filter.particle_count = particles;
    return SQF_OK;
}

int sqf_config_set_threads(sqf_config* config, int threads) {
    if (int rc = require(config != nullptr, "null config")) return rc;
    if (int rc = require(threads >= 1, "threads must be >= 1")) return rc;
    config->cfg.filter.threads = threads;
    return SQF_OK;
}

int sqf_config_set_algorithm(sqf_config* config, const char* algorithm) {
    if (int rc = require(config && algorithm, "null argument")) return rc;
    if (std::strcmp(algorithm, "sis") == 0)
        config->cfg.filter.algorithm = Algorithm::SIS;
    else if (std::strcmp(algorithm, "smc") == 0)
        config->cfg.filter.algorithm = Algorithm::SMC;
    else
        return fail(SQF_ERR_CONFIG, "algorithm must be 'sis' or 'smc'");
    return SQF_OK;
}

int sqf_config_set_data_path(sqf_config* config, const char* path) {
    if (int rc = require(config && path, "null argument")) return rc;
    return guarded([&] {
        if (!std::filesystem::exists(path))
            throw ConfigError(std::string("data file '") + path +
                              "' does not exist");
        config->cfg.data_paths = {std::filesystem::path(path)};
    });
}

int sqf_config_set_output_dir(sqf_config* config, const char* path) {
    if (int rc = require(config && path, "null argument")) return rc;
    config->cfg.output_dir = path;
    return SQF_OK;
}

void sqf_config_close(sqf_config* config) { delete config; }

int sqf_run_filter(const sqf_config* config, sqf_result** out) {
    if (int rc = require(config && out, "null argument")) return rc;
    return guarded(
        [&] { *out = new sqf_result{run_filter_command(config->cfg)}; });
}

int sqf_run_mcmc_reference(const sqf_config* config, int n_samples, int burn_in,
                           sqf_result** out) {
    if (int rc = require(config && out, "null argument")) return rc;
    return guarded([&] {
        *out = new sqf_result{
            run_mcmc_reference_command(config->cfg, n_samples, burn_in)};
    });
}

int sqf_run_convergence(const sqf_config* config, const size_t* particle_counts,
                        size_t n_counts, int repetitions, sqf_result** out) {
    if (int rc = require(config && out && particle_counts, "null argument"))
        return rc;
    return guarded([&] {
        std::vector<std::size_t> counts(particle_counts,
                                        particle_counts + n_counts);
        *out = new sqf_result{
            run_convergence_command(config->cfg, counts, repetitions)};
    });
}

int sqf_run_noise_calibration(const sqf_config* config, int n_mc,
                              sqf_result** out) {
    if (int rc = require(config && out, "null argument")) return rc;
    return guarded(
        [&] { *out = new sqf_result{run_calibrate_noise_command(config->cfg, n_mc)}; });
}

int sqf_run_oracle_check(const sqf_config* config, sqf_result** out) {
    if (int rc = require(config && out, "null argument")) return rc;
    int rc = guarded(
        [&] { *out = new sqf_result{run_oracle_check_command(config->cfg)}; });
    if (rc != SQF_OK) return rc;
    if (!(*out)->out.oracle_ok.value_or(false))
        return fail(SQF_ERR_NUMERIC, "oracle check failed: filter posterior "
                                     "outside 3 Monte Carlo standard errors");
    return SQF_OK;
}

int sqf_result_write(const sqf_result* result, const char* outdir) {
    if (int rc = require(result != nullptr, "null result")) return rc;
    return guarded([&] {
        write_outputs(result->out, outdir ? std::filesystem::path(outdir)
                                          : result->out.config.output_dir);
    });
}

size_t sqf_result_step_count(const sqf_result* result) {
    if (!result || !result->out.trace) return 0;
    return result->out.trace->steps.size();
}

int sqf_result_step(const sqf_result* result, size_t index, double* ess,
                    int* resampled, double* log_evidence_increment,
                    double* posterior_mean, double* posterior_variance) {
    if (int rc = require(result != nullptr, "null result")) return rc;
    if (int rc = require(result->out.trace.has_value(), "run has no trace"))
        return rc;
    const auto& steps = result->out.trace->steps;
    if (int rc = require(index < steps.size(), "step index out of range"))
        return rc;
    const StepRecord& rec = steps[index];
    if (ess) *ess = rec.ess;
    if (resampled) *resampled = rec.resampled ? 1 : 0;
    if (log_evidence_increment) *log_evidence_increment = rec.log_evidence_increment;
    if (posterior_mean) *posterior_mean = rec.posterior_mean[0];
    if (posterior_variance) *posterior_variance = rec.posterior_variance[0];
    return SQF_OK;
}

int sqf_result_log_evidence(const sqf_result* result, double* out) {
    if (int rc = require(result && out, "null argument")) return rc;
    if (int rc = require(result->out.trace.has_value(), "run has no trace"))
        return rc;
    *out = result->out.trace->cumulative_log_evidence();
    return SQF_OK;
}

int sqf_result_resample_count(const sqf_result* result, size_t* out) {
    if (int rc = require(result && out, "null argument")) return rc;
    if (int rc = require(result->out.trace.has_value(), "run has no trace"))
        return rc;
    *out = result->out.trace->resample_count();
    return SQF_OK;
}

int sqf_result_oracle_errors(const sqf_result* result, double* max_mean_error,
                             double* max_variance_error) {
    if (int rc = require(result != nullptr, "null result")) return rc;
    if (int rc = require(result->out.oracle_ok.has_value(),
                         "not an oracle-check result"))
        return rc;
    if (max_mean_error) *max_mean_error = *result->out.oracle_max_mean_error;
    if (max_variance_error)
        *max_variance_error = *result->out.oracle_max_variance_error;
    return SQF_OK;
}

void sqf_result_close(sqf_result* result) { delete result; }

}  // extern "C"
