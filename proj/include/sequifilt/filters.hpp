#ifndef SEQUIFILT_FILTERS_HPP
#define SEQUIFILT_FILTERS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sequifilt/kernels.hpp"
#include "sequifilt/models.hpp"
#include "sequifilt/particle.hpp"

namespace sequifilt {

enum class Algorithm { SIS, SMC };

struct FilterConfig {
    std::size_t particle_count = 2500;
    Algorithm algorithm = Algorithm::SMC;
    double threshold_fraction = 0.75;  // resample if ESS <= fraction * M
    int mcmc_moves = 5;
    double proposal_std = 0.25;
    std::uint64_t seed = 0;
    // When set, rejuvenation kernels fire only on steps that resampled.
    bool move_only_after_resample = false;
    int threads = 1;

    void validate() const;
    double threshold() const {
        return threshold_fraction * static_cast<double>(particle_count);
    }
};

struct StepRecord {
    std::size_t step = 0;            // 1-based observation step t
    double ess = 0.0;                // post-reweight, pre-resample
    bool resampled = false;
    double log_evidence_increment = 0.0;
    ParameterPoint posterior_mean;
    std::vector<double> posterior_variance;
};

struct FilterTrace {
    std::vector<StepRecord> steps;
    std::optional<ParticleApproximation> final_particles;

    double cumulative_log_evidence() const;
    std::size_t resample_count() const;
    // CSV columns: t,ess,resampled,log_evidence_increment,post_mean,post_var
    void write_csv(std::ostream& out) const;
};

// One SIS update: reweight only, positions unchanged.
std::pair<ParticleApproximation, StepRecord> sis_step(
    const ParticleApproximation& approx,
    const std::vector<double>& log_likelihood_terms, std::size_t step_index);

// One SMC update: reweight, conditional resample, then rejuvenation moves
// targeting the given posterior log-density. Move RNG substreams derive from
// (seed, step, particle), so results do not depend on the thread count.
std::pair<ParticleApproximation, StepRecord> smc_step(
    const ParticleApproximation& approx,
    const std::vector<double>& log_likelihood_terms,
    const std::function<double(const ParameterPoint&)>& target_log_density,
    const FilterConfig& config, std::size_t step_index);

// Runs the configured filter over the observation batches (each batch is a
// list of observation indices absorbed in one step). The initial cloud is a
// Monte Carlo prior sample. Empty batch list returns the prior cloud with an
// empty trace.
FilterTrace run_filter(const ForwardModel& model,
                       const std::vector<std::vector<std::size_t>>& batches,
                       const FilterConfig& config);

// Default batching: one observation per step, in order.
std::vector<std::vector<std::size_t>> one_per_step(std::size_t observation_count);

}  // namespace sequifilt

#endif
