#ifndef SEQUIFILT_RUNNER_HPP
#define SEQUIFILT_RUNNER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sequifilt/config.hpp"
#include "sequifilt/diagnostics.hpp"
#include "sequifilt/filters.hpp"

namespace sequifilt {

// Result of one CLI-level run, ready to be serialized. Exactly one of the
// payloads is populated, depending on the subcommand.
struct RunOutput {
    std::string subcommand;
    RunConfig config;
    double runtime_seconds = 0.0;

    std::optional<FilterTrace> trace;                    // sis / smc / oracle-check
    std::optional<ParticleApproximation> particles;      // posterior cloud
    std::optional<ConvergenceResult> convergence;        // convergence
    std::optional<double> sigma2_estimate;               // calibrate-noise
    std::optional<int> mcmc_total;                       // mcmc-ref
    std::optional<int> mcmc_burn_in;
    // oracle-check
    std::optional<double> oracle_max_mean_error;
    std::optional<double> oracle_max_variance_error;
    std::optional<bool> oracle_ok;
};

RunOutput run_filter_command(const RunConfig& config);
RunOutput run_mcmc_reference_command(const RunConfig& config, int n_samples,
                                     int burn_in);
RunOutput run_convergence_command(const RunConfig& config,
                                  const std::vector<std::size_t>& particle_counts,
                                  int repetitions);
RunOutput run_calibrate_noise_command(const RunConfig& config, int n_mc);
// Runs the configured filter on a gaussian-mean problem and compares every
// step against the analytic conjugate posterior at 3 Monte Carlo standard
// errors. oracle_ok reports the verdict; the CLI maps failure to exit code 3.
RunOutput run_oracle_check_command(const RunConfig& config);

// Writes summary.json plus the applicable CSV artifacts (trace.csv,
// particles_final.csv, kde.csv, deviation.csv, convergence.csv) into outdir.
void write_outputs(const RunOutput& output, const std::filesystem::path& outdir);

}  // namespace sequifilt

#endif
