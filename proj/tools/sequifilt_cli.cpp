// sequifilt command-line front end. Talks to the library exclusively through
// the C API, so it doubles as a smoke test of the shared-library surface.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sequifilt.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_dir;
    std::string data_path;
    std::string algorithm;  // set per subcommand for sis/smc
    std::uint64_t seed = 0;
    std::size_t particles = 0;
    int threads = 0;
    bool have_seed = false;
    bool have_particles = false;
    bool have_threads = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "JSON run configuration")
        ->required();
    cmd->add_option("-o,--output", opts.output_dir, "output directory");
    cmd->add_option("-d,--data", opts.data_path, "measurement CSV (overrides config)");
    cmd->add_option("-s,--seed", opts.seed, "RNG seed override")
        ->trigger_on_parse()
        ->each([&](const std::string&) { opts.have_seed = true; });
    cmd->add_option("-M,--particles", opts.particles, "particle count override")
        ->each([&](const std::string&) { opts.have_particles = true; });
    cmd->add_option("-j,--threads", opts.threads, "worker thread count")
        ->each([&](const std::string&) { opts.have_threads = true; });
}

int die(int code) {
    std::fprintf(stderr, "error: %s\n", sqf_last_error());
    // Collapse internal failures onto the generic-error exit code.
    return code == SQF_ERR_CONFIG || code == SQF_ERR_NUMERIC ? code : 1;
}

// Builds a configured handle from the parsed options; caller owns it.
int open_config(const CommonOpts& opts, sqf_config** out) {
    if (int rc = sqf_config_open(opts.config_path.c_str(), out)) return rc;
    sqf_config* cfg = *out;
    int rc = SQF_OK;
    if (rc == SQF_OK && !opts.algorithm.empty())
        rc = sqf_config_set_algorithm(cfg, opts.algorithm.c_str());
    if (rc == SQF_OK && opts.have_seed) rc = sqf_config_set_seed(cfg, opts.seed);
    if (rc == SQF_OK && opts.have_particles)
        rc = sqf_config_set_particles(cfg, opts.particles);
    if (rc == SQF_OK && opts.have_threads)
        rc = sqf_config_set_threads(cfg, opts.threads);
    if (rc == SQF_OK && !opts.data_path.empty())
        rc = sqf_config_set_data_path(cfg, opts.data_path.c_str());
    if (rc == SQF_OK && !opts.output_dir.empty())
        rc = sqf_config_set_output_dir(cfg, opts.output_dir.c_str());
    if (rc != SQF_OK) {
        sqf_config_close(cfg);
        *out = nullptr;
    }
    return rc;
}

// Runs `run`, writes artifacts into the configured output directory, prints a
// one-line summary. Ownership of cfg transfers here.
template <typename RunFn>
int execute(sqf_config* cfg, RunFn run) {
    sqf_result* result = nullptr;
    int rc = run(cfg, &result);
    std::string run_error = sqf_last_error();
    if (rc != SQF_OK && result == nullptr) {
        sqf_config_close(cfg);
        return die(rc);
    }
    int write_rc = sqf_result_write(result, nullptr);
    if (write_rc != SQF_OK) {
        sqf_result_close(result);
        sqf_config_close(cfg);
        return die(write_rc);
    }
    double oracle_mean_err = 0.0, oracle_var_err = 0.0;
    if (sqf_result_oracle_errors(result, &oracle_mean_err, &oracle_var_err) ==
        SQF_OK)
        std::printf("oracle max|mean error|=%.6g max|variance error|=%.6g\n",
                    oracle_mean_err, oracle_var_err);
    std::size_t steps = sqf_result_step_count(result);
    if (steps > 0) {
        double log_z = 0.0;
        std::size_t resamples = 0;
        sqf_result_log_evidence(result, &log_z);
        sqf_result_resample_count(result, &resamples);
        double mean = 0.0, var = 0.0;
        sqf_result_step(result, steps - 1, nullptr, nullptr, nullptr, &mean, &var);
        std::printf(
            "steps=%zu resamples=%zu log_evidence=%.6f post_mean=%.6f post_var=%.6g\n",
            steps, resamples, log_z, mean, var);
    }
    sqf_result_close(result);
    sqf_config_close(cfg);
    if (rc != SQF_OK) {
        std::fprintf(stderr, "error: %s\n", run_error.c_str());
        return rc == SQF_ERR_CONFIG || rc == SQF_ERR_NUMERIC ? rc : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequential Bayesian parameter filtering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", []() { return std::string(sqf_version()); });

    CommonOpts opts;
    int mcmc_samples = 60000;
    int mcmc_burn_in = 10000;
    std::vector<std::size_t> conv_counts = {16, 32, 64, 128, 256, 512, 1024};
    int conv_reps = 30;
    int calib_mc = 1000;

    CLI::App* sis = app.add_subcommand("sis", "sequential importance sampling");
    add_common(sis, opts);
    CLI::App* smc = app.add_subcommand(
        "smc", "SMC with resampling and rejuvenation moves");
    add_common(smc, opts);
    CLI::App* mcmc = app.add_subcommand(
        "mcmc-ref", "random-walk Metropolis reference posterior");
    add_common(mcmc, opts);
    mcmc->add_option("--samples", mcmc_samples, "total chain length");
    mcmc->add_option("--burn-in", mcmc_burn_in, "discarded initial samples");
    CLI::App* conv = app.add_subcommand(
        "convergence", "variance decay of the posterior-mean estimator");
    add_common(conv, opts);
    conv->add_option("--counts", conv_counts, "particle counts to sweep");
    conv->add_option("--repetitions", conv_reps, "independent runs per count");
    CLI::App* calib = app.add_subcommand(
        "calibrate-noise", "Monte Carlo observation-noise calibration");
    add_common(calib, opts);
    calib->add_option("--mc", calib_mc, "Monte Carlo replicates");
    CLI::App* oracle = app.add_subcommand(
        "oracle-check", "filter vs analytic conjugate posterior");
    add_common(oracle, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (sis->parsed()) opts.algorithm = "sis";
    if (smc->parsed()) opts.algorithm = "smc";

    sqf_config* cfg = nullptr;
    if (int rc = open_config(opts, &cfg)) return die(rc);

    if (sis->parsed() || smc->parsed())
        return execute(cfg, [](sqf_config* c, sqf_result** r) {
            return sqf_run_filter(c, r);
        });
    if (mcmc->parsed())
        return execute(cfg, [&](sqf_config* c, sqf_result** r) {
            return sqf_run_mcmc_reference(c, mcmc_samples, mcmc_burn_in, r);
        });
    if (conv->parsed())
        return execute(cfg, [&](sqf_config* c, sqf_result** r) {
            return sqf_run_convergence(c, conv_counts.data(), conv_counts.size(),
                                       conv_reps, r);
        });
    if (calib->parsed())
        return execute(cfg, [&](sqf_config* c, sqf_result** r) {
            return sqf_run_noise_calibration(c, calib_mc, r);
        });
    if (oracle->parsed())
        return execute(cfg, [](sqf_config* c, sqf_result** r) {
            return sqf_run_oracle_check(c, r);
        });

    sqf_config_close(cfg);
    return 2;
}
