#ifndef SEQUIFILT_CONFIG_HPP
#define SEQUIFILT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sequifilt/csv.hpp"
#include "sequifilt/filters.hpp"
#include "sequifilt/models.hpp"

namespace sequifilt {

// Parsed and validated run configuration (JSON). Physical constants carry no
// defaults: pendulum geometry, prior, and noise variance must be explicit.
// Unknown keys are rejected. The SEQUIFILT_SEED environment variable, when
// set, overrides the configured seed.
struct RunConfig {
    enum class ModelType { Pendulum, GaussianMean };

    ModelType model_type = ModelType::Pendulum;

    // pendulum
    PendulumConfig pendulum;
    TruncatedNormalPrior prior;
    GaussianNoise noise;
    std::vector<std::filesystem::path> data_paths;

    // gaussian-mean
    double gm_true_mean = 0.0;
    std::optional<std::vector<double>> gm_observations;
    std::size_t gm_observation_count = 0;
    std::uint64_t gm_data_seed = 0;

    FilterConfig filter;
    std::filesystem::path output_dir = "out";
    std::optional<double> g_true;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_json_text(const std::string& text,
                                    const std::filesystem::path& base_dir);
};

// Model plus step batching, materialized from a RunConfig (reads data files).
struct LoadedProblem {
    std::unique_ptr<ForwardModel> model;
    std::vector<std::vector<std::size_t>> batches;
};

LoadedProblem load_problem(const RunConfig& config);

}  // namespace sequifilt

#endif
