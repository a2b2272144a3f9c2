#include "sequifilt/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sequifilt/errors.hpp"
#include "sequifilt/kernels.hpp"

namespace sequifilt {

namespace {

using ordered_json = nlohmann::ordered_json;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string model_name(const RunConfig& config) {
    return config.model_type == RunConfig::ModelType::Pendulum ? "pendulum"
                                                               : "gaussian-mean";
}

std::string algorithm_name(const RunConfig& config) {
    return config.filter.algorithm == Algorithm::SIS ? "sis" : "smc";
}

ordered_json steps_json(const FilterTrace& trace) {
    ordered_json steps = ordered_json::array();
    for (const auto& s : trace.steps) {
        ordered_json rec;
        rec["t"] = s.step;
        rec["ess"] = s.ess;
        rec["resampled"] = s.resampled;
        rec["log_evidence_increment"] = s.log_evidence_increment;
        rec["post_mean"] = s.posterior_mean.size() == 1
                               ? ordered_json(s.posterior_mean[0])
                               : ordered_json(s.posterior_mean);
        rec["post_var"] = s.posterior_variance.size() == 1
                              ? ordered_json(s.posterior_variance[0])
                              : ordered_json(s.posterior_variance);
        steps.push_back(std::move(rec));
    }
    return steps;
}

}  // namespace

RunOutput run_filter_command(const RunConfig& config) {
    Stopwatch watch;
    LoadedProblem problem = load_problem(config);
    RunOutput out;
    out.subcommand = algorithm_name(config);
    out.config = config;
    FilterTrace trace = run_filter(*problem.model, problem.batches, config.filter);
    out.particles = trace.final_particles;
    out.trace = std::move(trace);
    out.runtime_seconds = watch.seconds();
    return out;
}

RunOutput run_mcmc_reference_command(const RunConfig& config, int n_samples,
                                     int burn_in) {
    Stopwatch watch;
    LoadedProblem problem = load_problem(config);
    const ForwardModel& model = *problem.model;
    std::vector<std::size_t> all_obs;
    for (const auto& batch : problem.batches)
        all_obs.insert(all_obs.end(), batch.begin(), batch.end());

    RwmKernel kernel{
        [&model, &all_obs](const ParameterPoint& x) {
            return model.joint_log_density(x, all_obs);
        },
        config.filter.proposal_std};
    ParameterPoint start =
        config.model_type == RunConfig::ModelType::Pendulum
            ? ParameterPoint{config.prior.mean}
            : ParameterPoint{0.0};
    RngStream rng = RngStream::derive(config.filter.seed, StreamId::Chain);
    std::vector<ParameterPoint> samples =
        mcmc_reference_run(kernel, start, n_samples, burn_in, rng);

    std::vector<double> log_weights(
        samples.size(), -std::log(static_cast<double>(samples.size())));
    RunOutput out;
    out.subcommand = "mcmc-ref";
    out.config = config;
    out.particles = ParticleApproximation(std::move(samples), std::move(log_weights));
    out.mcmc_total = n_samples;
    out.mcmc_burn_in = burn_in;
    out.runtime_seconds = watch.seconds();
    return out;
}

RunOutput run_convergence_command(const RunConfig& config,
                                  const std::vector<std::size_t>& particle_counts,
                                  int repetitions) {
    Stopwatch watch;
    LoadedProblem problem = load_problem(config);
    RunOutput out;
    out.subcommand = "convergence";
    out.config = config;
    out.convergence = convergence_study(*problem.model, problem.batches,
                                        particle_counts, repetitions, config.filter);
    out.runtime_seconds = watch.seconds();
    return out;
}

RunOutput run_calibrate_noise_command(const RunConfig& config, int n_mc) {
    if (config.model_type != RunConfig::ModelType::Pendulum)
        throw ConfigError("noise calibration requires the pendulum model");
    Stopwatch watch;
    std::vector<MeasurementSet> sets;
    for (const auto& path : config.data_paths)
        sets.push_back(parse_measurements(path));
    MeasurementSet merged = merge_measurements(sets);
    RngStream rng = RngStream::derive(config.filter.seed, StreamId::Calibrate);
    RunOutput out;
    out.subcommand = "calibrate-noise";
    out.config = config;
    // schedule: generated zero crossings of the nominal trajectory, one per
    // recorded measurement (angle sensitivity to time noise peaks there)
    std::vector<double> schedule = zero_crossing_times(
        config.prior.mean, merged.times.size(), config.pendulum);
    out.sigma2_estimate = calibrate_noise_variance(
        config.pendulum, config.prior.mean, schedule, n_mc, rng);
    out.runtime_seconds = watch.seconds();
    return out;
}

RunOutput run_oracle_check_command(const RunConfig& config) {
    if (config.model_type != RunConfig::ModelType::GaussianMean)
        throw ConfigError("oracle-check requires the gaussian-mean model");
    Stopwatch watch;
    LoadedProblem problem = load_problem(config);
    auto* model = dynamic_cast<const GaussianMeanForwardModel*>(problem.model.get());
    FilterTrace trace = run_filter(*model, problem.batches, config.filter);

    double max_mean_err = 0.0, max_var_err = 0.0;
    bool ok = true;
    double running_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < problem.batches.size(); ++b) {
        for (std::size_t idx : problem.batches[b]) {
            running_sum += model->observations()[idx];
            ++seen;
        }
        auto [exact_mean, exact_var] = conjugate_posterior(
            {0.0, running_sum, static_cast<int>(seen)});
        const StepRecord& rec = trace.steps[b];
        double ess = std::max(rec.ess, 1.0);
        double mean_err = std::abs(rec.posterior_mean[0] - exact_mean);
        double var_err = std::abs(rec.posterior_variance[0] - exact_var);
        max_mean_err = std::max(max_mean_err, mean_err);
        max_var_err = std::max(max_var_err, var_err);
        if (mean_err > 3.0 * std::sqrt(exact_var / ess)) ok = false;
        if (var_err > 3.0 * exact_var * std::sqrt(2.0 / ess)) ok = false;
    }

    RunOutput out;
    out.subcommand = "oracle-check";
    out.config = config;
    out.particles = trace.final_particles;
    out.trace = std::move(trace);
    out.oracle_max_mean_error = max_mean_err;
    out.oracle_max_variance_error = max_var_err;
    out.oracle_ok = ok;
    out.runtime_seconds = watch.seconds();
    return out;
}

void write_outputs(const RunOutput& output, const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    auto open = [&](const std::string& name) {
        std::ofstream file(outdir / name);
        if (!file)
            throw ConfigError(
                fmt::format("cannot write '{}'", (outdir / name).string()));
        return file;
    };

    ordered_json summary;
    summary["subcommand"] = output.subcommand;
    summary["model"] = model_name(output.config);
    summary["algorithm"] = algorithm_name(output.config);
    summary["particles"] = output.config.filter.particle_count;
    summary["seed"] = output.config.filter.seed;

    if (output.trace) {
        summary["steps"] = steps_json(*output.trace);
        summary["cumulative_log_evidence"] = output.trace->cumulative_log_evidence();
        ordered_json resample_steps = ordered_json::array();
        for (const auto& s : output.trace->steps)
            if (s.resampled) resample_steps.push_back(s.step);
        summary["resample_steps"] = std::move(resample_steps);
        auto trace_csv = open("trace.csv");
        output.trace->write_csv(trace_csv);
    }
    if (output.mcmc_total) {
        summary["mcmc_samples"] = *output.mcmc_total;
        summary["mcmc_burn_in"] = *output.mcmc_burn_in;
        summary["retained"] = output.particles->size();
    }
    if (output.particles) {
        const auto& particles = *output.particles;
        summary["posterior_mean"] =
            particles.dimension() == 1
                ? ordered_json(particles.weighted_mean()[0])
                : ordered_json(particles.weighted_mean());
        summary["posterior_variance"] =
            particles.dimension() == 1
                ? ordered_json(particles.weighted_variance()[0])
                : ordered_json(particles.weighted_variance());
        auto particle_csv = open("particles_final.csv");
        particles.write_csv(particle_csv);

        if (particles.dimension() == 1 &&
            particles.weighted_variance()[0] > 0.0) {
            double bandwidth = silverman_bandwidth(particles);
            KdeEstimate est =
                kde(particles, kde_default_grid(particles, bandwidth), bandwidth);
            auto kde_csv = open("kde.csv");
            kde_csv << "grid,density\n";
            for (std::size_t i = 0; i < est.grid.size(); ++i)
                kde_csv << fmt::format("{},{}\n", est.grid[i], est.density[i]);
            summary["kde_bandwidth"] = est.bandwidth;
        }
        if (output.config.g_true && particles.dimension() == 1) {
            std::vector<double> epsilons;
            for (int i = 0; i <= 40; ++i)
                epsilons.push_back(static_cast<double>(i) * 0.005);
            std::vector<double> probs = deviation_probability_curve(
                particles, *output.config.g_true, epsilons);
            auto dev_csv = open("deviation.csv");
            dev_csv << "epsilon,probability\n";
            for (std::size_t i = 0; i < epsilons.size(); ++i)
                dev_csv << fmt::format("{},{}\n", epsilons[i], probs[i]);
        }
    }
    if (output.convergence) {
        auto conv_csv = open("convergence.csv");
        conv_csv << "particles,mean_of_means,variance_of_means\n";
        for (const auto& row : output.convergence->rows)
            conv_csv << fmt::format("{},{},{}\n", row.particles, row.mean_of_means,
                                    row.variance_of_means);
        summary["variance_slope"] = output.convergence->slope;
        ordered_json rows = ordered_json::array();
        for (const auto& row : output.convergence->rows) {
            rows.push_back({{"particles", row.particles},
                            {"mean_of_means", row.mean_of_means},
                            {"variance_of_means", row.variance_of_means}});
        }
        summary["convergence"] = std::move(rows);
    }
    if (output.sigma2_estimate)
        summary["sigma2_estimate"] = *output.sigma2_estimate;
    if (output.oracle_ok) {
        summary["oracle_max_mean_error"] = *output.oracle_max_mean_error;
        summary["oracle_max_variance_error"] = *output.oracle_max_variance_error;
        summary["oracle_ok"] = *output.oracle_ok;
    }
    summary["runtime_seconds"] = output.runtime_seconds;

    auto summary_file = open("summary.json");
    summary_file << summary.dump(2) << "\n";
}

}  // namespace sequifilt
