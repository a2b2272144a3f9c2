#include "sequifilt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sequifilt/errors.hpp"

namespace sequifilt {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& section,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key))
            throw ConfigError(
                fmt::format("unknown key '{}' in config section '{}'", key, section));
    }
}

double require_number(const json& obj, const std::string& section,
                      const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError(fmt::format("missing '{}' in config section '{}'", key,
                                      section));
    if (!obj[key].is_number())
        throw ConfigError(
            fmt::format("'{}' in section '{}' must be a number", key, section));
    return obj[key].get<double>();
}

std::string require_string(const json& obj, const std::string& section,
                           const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw ConfigError(
            fmt::format("missing string '{}' in config section '{}'", key, section));
    return obj[key].get<std::string>();
}

void parse_model(const json& model, RunConfig& cfg) {
    std::string type = require_string(model, "model", "type");
    if (type == "pendulum") {
        cfg.model_type = RunConfig::ModelType::Pendulum;
        reject_unknown_keys(model, "model",
                            {"type", "length", "initial_angle", "initial_velocity",
                             "rk4_step"});
        cfg.pendulum.length = require_number(model, "model", "length");
        cfg.pendulum.initial_angle = require_number(model, "model", "initial_angle");
        cfg.pendulum.initial_velocity =
            require_number(model, "model", "initial_velocity");
        cfg.pendulum.rk4_step = require_number(model, "model", "rk4_step");
        cfg.pendulum.validate();
    } else if (type == "gaussian-mean") {
        cfg.model_type = RunConfig::ModelType::GaussianMean;
        reject_unknown_keys(model, "model",
                            {"type", "true_mean", "observations",
                             "observation_count", "data_seed"});
        if (model.contains("observations")) {
            if (!model["observations"].is_array())
                throw ConfigError("model.observations must be an array");
            cfg.gm_observations = model["observations"].get<std::vector<double>>();
            if (cfg.gm_observations->empty())
                throw ConfigError("model.observations must not be empty");
        } else {
            cfg.gm_true_mean = require_number(model, "model", "true_mean");
            double n = require_number(model, "model", "observation_count");
            if (n < 1.0 || n != std::floor(n))
                throw ConfigError("observation_count must be a positive integer");
            cfg.gm_observation_count = static_cast<std::size_t>(n);
            cfg.gm_data_seed = model.value("data_seed", std::uint64_t{0});
        }
    } else {
        throw ConfigError(fmt::format("unknown model type '{}'", type));
    }
}

void parse_filter(const json& filter, FilterConfig& cfg) {
    reject_unknown_keys(filter, "filter",
                        {"algorithm", "particles", "threshold_fraction",
                         "mcmc_moves", "proposal_std", "seed",
                         "move_only_after_resample"});
    std::string algo = require_string(filter, "filter", "algorithm");
    if (algo == "sis")
        cfg.algorithm = Algorithm::SIS;
    else if (algo == "smc")
        cfg.algorithm = Algorithm::SMC;
    else
        throw ConfigError(fmt::format("unknown algorithm '{}'", algo));
    double m = require_number(filter, "filter", "particles");
    if (m < 2.0 || m != std::floor(m))
        throw ConfigError("filter.particles must be an integer >= 2");
    cfg.particle_count = static_cast<std::size_t>(m);
    cfg.threshold_fraction = filter.value("threshold_fraction", 0.75);
    cfg.mcmc_moves = filter.value("mcmc_moves", 5);
    cfg.proposal_std = filter.value("proposal_std", 0.25);
    cfg.seed = filter.value("seed", std::uint64_t{0});
    cfg.move_only_after_resample = filter.value("move_only_after_resample", false);
    cfg.validate();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(root, "<root>",
                        {"model", "prior", "noise", "filter", "data", "output",
                         "g_true"});

    RunConfig cfg;
    if (!root.contains("model")) throw ConfigError("missing 'model' section");
    parse_model(root["model"], cfg);

    if (cfg.model_type == ModelType::Pendulum) {
        if (!root.contains("prior")) throw ConfigError("missing 'prior' section");
        const json& prior = root["prior"];
        reject_unknown_keys(prior, "prior", {"mean", "std", "lower", "upper"});
        cfg.prior.mean = require_number(prior, "prior", "mean");
        cfg.prior.std = require_number(prior, "prior", "std");
        cfg.prior.lower = require_number(prior, "prior", "lower");
        cfg.prior.upper = require_number(prior, "prior", "upper");
        cfg.prior.validate();

        if (!root.contains("noise")) throw ConfigError("missing 'noise' section");
        const json& noise = root["noise"];
        reject_unknown_keys(noise, "noise", {"variance"});
        cfg.noise.variance = require_number(noise, "noise", "variance");
        cfg.noise.validate();

        if (!root.contains("data"))
            throw ConfigError("pendulum config requires a 'data' file");
        const json& data = root["data"];
        std::vector<std::string> paths;
        if (data.is_string())
            paths.push_back(data.get<std::string>());
        else if (data.is_array())
            paths = data.get<std::vector<std::string>>();
        else
            throw ConfigError("'data' must be a path or an array of paths");
        if (paths.empty()) throw ConfigError("'data' must name at least one file");
        for (const auto& p : paths) {
            std::filesystem::path resolved = p;
            if (resolved.is_relative()) resolved = base_dir / resolved;
            if (!std::filesystem::exists(resolved))
                throw ConfigError(
                    fmt::format("data file '{}' does not exist", resolved.string()));
            cfg.data_paths.push_back(std::move(resolved));
        }
    } else {
        for (const char* section : {"prior", "noise", "data"})
            if (root.contains(section))
                throw ConfigError(fmt::format(
                    "section '{}' is not valid for the gaussian-mean model",
                    section));
    }

    if (!root.contains("filter")) throw ConfigError("missing 'filter' section");
    parse_filter(root["filter"], cfg.filter);

    if (root.contains("output")) {
        std::filesystem::path out = require_string(root, "<root>", "output");
        cfg.output_dir = out.is_relative() ? base_dir / out : out;
    }
    if (root.contains("g_true")) {
        if (!root["g_true"].is_number())
            throw ConfigError("'g_true' must be a number");
        cfg.g_true = root["g_true"].get<double>();
    }

    if (const char* env_seed = std::getenv("SEQUIFILT_SEED")) {
        try {
            std::size_t used = 0;
            cfg.filter.seed = std::stoull(env_seed, &used);
            if (env_seed[used] != '\0') throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError(
                fmt::format("SEQUIFILT_SEED is not an integer: '{}'", env_seed));
        }
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str(), path.parent_path());
}

LoadedProblem load_problem(const RunConfig& config) {
    LoadedProblem problem;
    if (config.model_type == RunConfig::ModelType::Pendulum) {
        std::vector<MeasurementSet> sets;
        for (const auto& path : config.data_paths)
            sets.push_back(parse_measurements(path));
        MeasurementSet merged = merge_measurements(sets);
        problem.batches = merged.batches();
        problem.model = std::make_unique<PendulumModel>(
            config.pendulum, config.prior, config.noise, merged.times,
            merged.angles);
    } else {
        std::vector<double> observations;
        if (config.gm_observations) {
            observations = *config.gm_observations;
        } else {
            RngStream rng =
                RngStream::derive(config.gm_data_seed, StreamId::Data);
            observations = GaussianMeanForwardModel::synthesize(
                config.gm_true_mean, config.gm_observation_count, rng);
        }
        problem.batches = one_per_step(observations.size());
        problem.model =
            std::make_unique<GaussianMeanForwardModel>(std::move(observations));
    }
    return problem;
}

}  // namespace sequifilt
