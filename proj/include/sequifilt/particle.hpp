#ifndef SEQUIFILT_PARTICLE_HPP
#define SEQUIFILT_PARTICLE_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "sequifilt/rng.hpp"

namespace sequifilt {

using ParameterPoint = std::vector<double>;

struct ResampleDecision {
    double ess = 0.0;
    double threshold = 0.0;
    bool resampled = false;
};

// Resample on ess <= threshold; ties resample.
ResampleDecision make_resample_decision(double ess, double threshold);

// A weighted particle cloud representing a probability measure on R^N.
// Weights are stored as log-weights and kept normalized so that
// log_sum_exp(log_weights) == 0. Immutable after construction: operations
// return new values.
class ParticleApproximation {
public:
    // Takes ownership and normalizes. Positions must be nonempty, of equal
    // dimension, with finite coordinates. Log-weights may be -inf but not all.
    ParticleApproximation(std::vector<ParameterPoint> positions,
                          std::vector<double> log_weights);

    // M independent prior draws with uniform weights 1/M.
    static ParticleApproximation monte_carlo(
        const std::function<ParameterPoint(RngStream&)>& prior_sampler,
        std::size_t count, RngStream& rng);

    std::size_t size() const { return positions_.size(); }
    std::size_t dimension() const { return positions_.front().size(); }
    const std::vector<ParameterPoint>& positions() const { return positions_; }
    const std::vector<double>& log_weights() const { return log_weights_; }
    // Weights in linear space, summing to 1.
    std::vector<double> weights() const;

    // sum_i W_i f(X_i)
    double integrate(const std::function<double(const ParameterPoint&)>& f) const;

    // integrate over the indicator of predicate, clamped to [0, 1].
    double event_probability(
        const std::function<bool(const ParameterPoint&)>& predicate) const;

    // New cloud with log-weights shifted by the per-particle log-likelihood;
    // positions unchanged. Second element is the log-evidence increment
    // log(sum_i W_i L_i). Throws NumericalError if every particle collapses
    // to zero likelihood.
    std::pair<ParticleApproximation, double> reweight(
        const std::function<double(const ParameterPoint&)>& log_likelihood) const;

    // Convenience overload for precomputed per-particle log-likelihood terms.
    std::pair<ParticleApproximation, double> reweight(
        const std::vector<double>& log_likelihood_terms) const;

    // 1 / sum_i W_i^2, in [1, M].
    double effective_sample_size() const;

    // Multinomial resampling by the inverse-CDF rule: for each output slot
    // draw U ~ Unif[0,1) and copy the particle with the smallest index k such
    // that cumsum(W)_k >= U. Output weights are all 1/M.
    ParticleApproximation resample(RngStream& rng) const;

    ParameterPoint weighted_mean() const;
    // Per-coordinate weighted variance (second moment minus squared mean,
    // floored at zero).
    std::vector<double> weighted_variance() const;

    // CSV: header position_0,...,position_{N-1},weight; linear weights;
    // round-trip decimal formatting.
    void write_csv(std::ostream& out) const;
    static ParticleApproximation read_csv(std::istream& in);

private:
    struct Raw {};
    ParticleApproximation(Raw, std::vector<ParameterPoint> positions,
                          std::vector<double> log_weights);
    void normalize();

    std::vector<ParameterPoint> positions_;
    std::vector<double> log_weights_;
};

}  // namespace sequifilt

#endif
