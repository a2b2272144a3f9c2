#include "sequifilt/filters.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "sequifilt/errors.hpp"
#include "sequifilt/parallel.hpp"

namespace sequifilt {

void FilterConfig::validate() const {
    if (particle_count < 2)
        throw ConfigError("filter requires at least two particles");
    if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
        throw ConfigError("threshold_fraction must lie in (0, 1]");
    if (mcmc_moves < 0) throw ConfigError("mcmc_moves must be nonnegative");
    if (!(proposal_std > 0.0)) throw ConfigError("proposal_std must be positive");
    if (threads < 1) throw ConfigError("thread count must be positive");
}

double FilterTrace::cumulative_log_evidence() const {
    double acc = 0.0;
    for (const auto& s : steps) acc += s.log_evidence_increment;
    return acc;
}

std::size_t FilterTrace::resample_count() const {
    std::size_t n = 0;
    for (const auto& s : steps)
        if (s.resampled) ++n;
    return n;
}

namespace {

std::string join_coords(const std::vector<double>& v) {
    std::string out;
    for (std::size_t d = 0; d < v.size(); ++d) {
        if (d) out += ';';
        out += fmt::format("{}", v[d]);
    }
    return out;
}

StepRecord summarize(const ParticleApproximation& approx, std::size_t step,
                     double ess, bool resampled, double log_evidence_increment) {
    StepRecord rec;
    rec.step = step;
    rec.ess = ess;
    rec.resampled = resampled;
    rec.log_evidence_increment = log_evidence_increment;
    rec.posterior_mean = approx.weighted_mean();
    rec.posterior_variance = approx.weighted_variance();
    return rec;
}

}  // namespace

void FilterTrace::write_csv(std::ostream& out) const {
    out << "t,ess,resampled,log_evidence_increment,post_mean,post_var\n";
    for (const auto& s : steps) {
        out << fmt::format("{},{},{},{},{},{}\n", s.step, s.ess,
                           s.resampled ? 1 : 0, s.log_evidence_increment,
                           join_coords(s.posterior_mean),
                           join_coords(s.posterior_variance));
    }
}

std::pair<ParticleApproximation, StepRecord> sis_step(
    const ParticleApproximation& approx,
    const std::vector<double>& log_likelihood_terms, std::size_t step_index) {
    auto [updated, log_evidence] = approx.reweight(log_likelihood_terms);
    double ess = updated.effective_sample_size();
    StepRecord rec = summarize(updated, step_index, ess, false, log_evidence);
    return {std::move(updated), std::move(rec)};
}

std::pair<ParticleApproximation, StepRecord> smc_step(
    const ParticleApproximation& approx,
    const std::vector<double>& log_likelihood_terms,
    const std::function<double(const ParameterPoint&)>& target_log_density,
    const FilterConfig& config, std::size_t step_index) {
    config.validate();
    auto [updated, log_evidence] = approx.reweight(log_likelihood_terms);
    double ess = updated.effective_sample_size();
    ResampleDecision decision = make_resample_decision(ess, config.threshold());

    ParticleApproximation current = std::move(updated);
    if (decision.resampled) {
        RngStream rng = RngStream::derive(config.seed, StreamId::Resample,
                                          {static_cast<std::uint64_t>(step_index)});
        current = current.resample(rng);
    }

    bool move = config.mcmc_moves > 0 &&
                (!config.move_only_after_resample || decision.resampled);
    if (move) {
        RwmKernel kernel{target_log_density, config.proposal_std};
        std::vector<ParameterPoint> moved(current.size());
        const auto& positions = current.positions();
        parallel_for(current.size(), config.threads, [&](std::size_t i) {
            RngStream rng = RngStream::derive(
                config.seed, StreamId::Move,
                {static_cast<std::uint64_t>(step_index),
                 static_cast<std::uint64_t>(i)});
            moved[i] = apply_n(kernel, positions[i], config.mcmc_moves, rng);
        });
        current = ParticleApproximation(std::move(moved), current.log_weights());
    }

    StepRecord rec =
        summarize(current, step_index, ess, decision.resampled, log_evidence);
    return {std::move(current), std::move(rec)};
}

std::vector<std::vector<std::size_t>> one_per_step(std::size_t observation_count) {
    std::vector<std::vector<std::size_t>> batches(observation_count);
    for (std::size_t i = 0; i < observation_count; ++i) batches[i] = {i};
    return batches;
}

FilterTrace run_filter(const ForwardModel& model,
                       const std::vector<std::vector<std::size_t>>& batches,
                       const FilterConfig& config) {
    config.validate();
    if (model.observation_count() == 0)
        throw ConfigError("model carries no observations");
    std::vector<std::size_t> used;
    for (const auto& batch : batches) {
        if (batch.empty()) throw ConfigError("empty observation batch");
        for (std::size_t idx : batch) {
            if (idx >= model.observation_count())
                throw ConfigError(
                    fmt::format("observation index {} out of range", idx));
            used.push_back(idx);
        }
    }

    RngStream init_rng = RngStream::derive(config.seed, StreamId::Init);
    ParticleApproximation approx = ParticleApproximation::monte_carlo(
        [&](RngStream& r) { return model.sample_prior_point(r); },
        config.particle_count, init_rng);

    FilterTrace trace;
    if (batches.empty()) {
        trace.final_particles = std::move(approx);
        return trace;
    }

    const std::size_t m = approx.size();

    // SIS positions never move, so every likelihood term can be evaluated
    // once up front.
    std::vector<std::vector<double>> sis_terms;  // [particle][used-obs order]
    if (config.algorithm == Algorithm::SIS) {
        sis_terms.assign(m, {});
        const auto& positions = approx.positions();
        parallel_for(m, config.threads, [&](std::size_t i) {
            sis_terms[i] = model.log_likelihoods(positions[i], used);
        });
    }

    std::vector<std::size_t> processed;
    std::size_t used_cursor = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& batch = batches[b];
        std::vector<double> terms(m, 0.0);
        if (config.algorithm == Algorithm::SIS) {
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t k = 0; k < batch.size(); ++k)
                    acc += sis_terms[i][used_cursor + k];
                terms[i] = acc;
            }
        } else {
            const auto& positions = approx.positions();
            parallel_for(m, config.threads, [&](std::size_t i) {
                std::vector<double> lls = model.log_likelihoods(positions[i], batch);
                terms[i] = std::accumulate(lls.begin(), lls.end(), 0.0);
            });
        }
        used_cursor += batch.size();
        processed.insert(processed.end(), batch.begin(), batch.end());

        if (config.algorithm == Algorithm::SIS) {
            auto [next, rec] = sis_step(approx, terms, b + 1);
            approx = std::move(next);
            trace.steps.push_back(std::move(rec));
        } else {
            auto target = [&model, obs = processed](const ParameterPoint& x) {
                return model.joint_log_density(x, obs);
            };
            auto [next, rec] = smc_step(approx, terms, target, config, b + 1);
            approx = std::move(next);
            trace.steps.push_back(std::move(rec));
        }
    }
    trace.final_particles = std::move(approx);
    return trace;
}

}  // namespace sequifilt
