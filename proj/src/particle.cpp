#include "sequifilt/particle.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sequifilt/errors.hpp"
#include "sequifilt/logsumexp.hpp"

namespace sequifilt {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ResampleDecision make_resample_decision(double ess, double threshold) {
    return ResampleDecision{ess, threshold, ess <= threshold};
}

ParticleApproximation::ParticleApproximation(std::vector<ParameterPoint> positions,
                                             std::vector<double> log_weights)
    : positions_(std::move(positions)), log_weights_(std::move(log_weights)) {
    if (positions_.empty())
        throw ConfigError("particle approximation requires at least one particle");
    if (positions_.size() != log_weights_.size())
        throw ConfigError(fmt::format(
            "positions/log-weights length mismatch: {} vs {}", positions_.size(),
            log_weights_.size()));
    const std::size_t dim = positions_.front().size();
    if (dim == 0) throw ConfigError("zero-dimensional parameter points");
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (positions_[i].size() != dim)
            throw ConfigError(fmt::format("particle {} has dimension {}, expected {}",
                                          i, positions_[i].size(), dim));
        for (double c : positions_[i])
            if (!std::isfinite(c))
                throw NumericalError(
                    fmt::format("non-finite coordinate in particle {}", i));
        double lw = log_weights_[i];
        if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity())
            throw NumericalError(fmt::format("invalid log-weight at particle {}", i));
    }
    normalize();
}

ParticleApproximation::ParticleApproximation(Raw, std::vector<ParameterPoint> positions,
                                             std::vector<double> log_weights)
    : positions_(std::move(positions)), log_weights_(std::move(log_weights)) {}

void ParticleApproximation::normalize() {
    double shift = log_sum_exp(log_weights_);
    if (shift == kNegInf)
        throw NumericalError("all particle weights are zero");
    for (double& lw : log_weights_) lw -= shift;
}

ParticleApproximation ParticleApproximation::monte_carlo(
    const std::function<ParameterPoint(RngStream&)>& prior_sampler,
    std::size_t count, RngStream& rng) {
    if (count < 1) throw ConfigError("monte_carlo requires at least one particle");
    std::vector<ParameterPoint> positions;
    positions.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ParameterPoint x = prior_sampler(rng);
        for (double c : x)
            if (!std::isfinite(c))
                throw NumericalError(
                    fmt::format("prior sampler returned a non-finite point at draw {}", i));
        positions.push_back(std::move(x));
    }
    std::vector<double> log_weights(count, -std::log(static_cast<double>(count)));
    ParticleApproximation approx(Raw{}, std::move(positions), std::move(log_weights));
    approx.normalize();
    return approx;
}

std::vector<double> ParticleApproximation::weights() const {
    std::vector<double> w(log_weights_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights_[i]);
    return w;
}

double ParticleApproximation::integrate(
    const std::function<double(const ParameterPoint&)>& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        double fi = f(positions_[i]);
        if (!std::isfinite(fi))
            throw NumericalError(
                fmt::format("integrand non-finite at particle {}", i));
        if (log_weights_[i] == kNegInf) continue;
        acc += std::exp(log_weights_[i]) * fi;
    }
    return acc;
}

double ParticleApproximation::event_probability(
    const std::function<bool(const ParameterPoint&)>& predicate) const {
    double p = integrate([&](const ParameterPoint& x) {
        return predicate(x) ? 1.0 : 0.0;
    });
    return std::clamp(p, 0.0, 1.0);
}

std::pair<ParticleApproximation, double> ParticleApproximation::reweight(
    const std::function<double(const ParameterPoint&)>& log_likelihood) const {
    std::vector<double> terms(positions_.size(), kNegInf);
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (log_weights_[i] == kNegInf) continue;
        double ll = log_likelihood(positions_[i]);
        if (std::isnan(ll) || ll == std::numeric_limits<double>::infinity())
            throw NumericalError(
                fmt::format("log-likelihood invalid at particle {}", i));
        terms[i] = ll;
    }
    return reweight(terms);
}

std::pair<ParticleApproximation, double> ParticleApproximation::reweight(
    const std::vector<double>& log_likelihood_terms) const {
    if (log_likelihood_terms.size() != positions_.size())
        throw ConfigError("log-likelihood term count mismatch");
    std::vector<double> new_lw(positions_.size());
    for (std::size_t i = 0; i < new_lw.size(); ++i)
        new_lw[i] = log_weights_[i] + log_likelihood_terms[i];
    double log_evidence = log_sum_exp(new_lw);
    if (log_evidence == kNegInf)
        throw NumericalError(
            "likelihood collapse: every particle has zero posterior weight");
    for (double& lw : new_lw) lw -= log_evidence;
    ParticleApproximation out(Raw{}, positions_, std::move(new_lw));
    return {std::move(out), log_evidence};
}

double ParticleApproximation::effective_sample_size() const {
    // 1 / sum W_i^2 computed in log space as exp(-lse(2 * lw)).
    std::vector<double> doubled(log_weights_.size());
    for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] = 2.0 * log_weights_[i];
    return std::exp(-log_sum_exp(doubled));
}

ParticleApproximation ParticleApproximation::resample(RngStream& rng) const {
    const std::size_t m = positions_.size();
    std::vector<double> cumulative(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += std::exp(log_weights_[i]);
        cumulative[i] = acc;
    }
    // Floating-point cumsum can end just below 1; clamp so U close to 1
    // always selects a particle.
    cumulative[m - 1] = 1.0;
    std::vector<ParameterPoint> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        double u = rng.uniform();
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
        out.push_back(positions_[static_cast<std::size_t>(it - cumulative.begin())]);
    }
    std::vector<double> log_weights(m, -std::log(static_cast<double>(m)));
    ParticleApproximation approx(Raw{}, std::move(out), std::move(log_weights));
    approx.normalize();
    return approx;
}

ParameterPoint ParticleApproximation::weighted_mean() const {
    ParameterPoint mean(dimension(), 0.0);
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (log_weights_[i] == kNegInf) continue;
        double w = std::exp(log_weights_[i]);
        for (std::size_t d = 0; d < mean.size(); ++d)
            mean[d] += w * positions_[i][d];
    }
    return mean;
}

std::vector<double> ParticleApproximation::weighted_variance() const {
    ParameterPoint mean = weighted_mean();
    std::vector<double> second(dimension(), 0.0);
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (log_weights_[i] == kNegInf) continue;
        double w = std::exp(log_weights_[i]);
        for (std::size_t d = 0; d < second.size(); ++d)
            second[d] += w * positions_[i][d] * positions_[i][d];
    }
    for (std::size_t d = 0; d < second.size(); ++d)
        second[d] = std::max(0.0, second[d] - mean[d] * mean[d]);
    return second;
}

void ParticleApproximation::write_csv(std::ostream& out) const {
    const std::size_t dim = dimension();
    for (std::size_t d = 0; d < dim; ++d) out << fmt::format("position_{},", d);
    out << "weight\n";
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d)
            out << fmt::format("{},", positions_[i][d]);
        out << fmt::format("{}\n", std::exp(log_weights_[i]));
    }
}

ParticleApproximation ParticleApproximation::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("particle CSV: missing header");
    std::size_t dim = static_cast<std::size_t>(
        std::count(line.begin(), line.end(), ','));
    if (dim == 0 || line.substr(0, 9) != "position_")
        throw ConfigError("particle CSV: malformed header");
    std::vector<ParameterPoint> positions;
    std::vector<double> log_weights;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        ParameterPoint x;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError(
                    fmt::format("particle CSV: bad number at line {}", line_no));
            }
        }
        if (values.size() != dim + 1)
            throw ConfigError(
                fmt::format("particle CSV: wrong column count at line {}", line_no));
        x.assign(values.begin(), values.end() - 1);
        positions.push_back(std::move(x));
        log_weights.push_back(values.back() > 0.0 ? std::log(values.back())
                                                  : kNegInf);
    }
    return ParticleApproximation(std::move(positions), std::move(log_weights));
}

}  // namespace sequifilt
