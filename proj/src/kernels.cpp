#include "sequifilt/kernels.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sequifilt/errors.hpp"

namespace sequifilt {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

RwmResult rwm_step_cached(const RwmKernel& kernel, const ParameterPoint& x,
                          double log_density_x, RngStream& rng) {
    if (!(kernel.proposal_std > 0.0))
        throw ConfigError("proposal std must be positive");
    ParameterPoint proposal(x.size());
    for (std::size_t d = 0; d < x.size(); ++d)
        proposal[d] = x[d] + rng.normal(0.0, kernel.proposal_std);
    double log_density_prop = kernel.target_log_density(proposal);
    // Drawing U unconditionally keeps the stream layout identical whether or
    // not the ratio exceeds one.
    double log_u = std::log(rng.uniform_positive());
    if (log_density_prop - log_density_x >= log_u)
        return {std::move(proposal), log_density_prop, true};
    return {x, log_density_x, false};
}

std::pair<ParameterPoint, bool> rwm_step(const RwmKernel& kernel,
                                         const ParameterPoint& x, RngStream& rng) {
    double log_density_x = kernel.target_log_density(x);
    if (log_density_x == kNegInf)
        throw NumericalError("RWM started from a zero-density state");
    RwmResult r = rwm_step_cached(kernel, x, log_density_x, rng);
    return {std::move(r.state), r.accepted};
}

ParameterPoint apply_n(const RwmKernel& kernel, const ParameterPoint& x, int n,
                       RngStream& rng) {
    if (n < 0) throw ConfigError("step count must be nonnegative");
    if (n == 0) return x;
    double log_density = kernel.target_log_density(x);
    if (log_density == kNegInf)
        throw NumericalError("RWM started from a zero-density state");
    ParameterPoint state = x;
    for (int i = 0; i < n; ++i) {
        RwmResult r = rwm_step_cached(kernel, state, log_density, rng);
        state = std::move(r.state);
        log_density = r.log_density;
    }
    return state;
}

std::vector<ParameterPoint> mcmc_reference_run(const RwmKernel& kernel,
                                               const ParameterPoint& x_init,
                                               int n_samples, int burn_in,
                                               RngStream& rng) {
    if (burn_in < 0 || n_samples <= burn_in)
        throw ConfigError(
            fmt::format("need n_samples > burn_in >= 0, got {} and {}", n_samples,
                        burn_in));
    double log_density = kernel.target_log_density(x_init);
    if (log_density == kNegInf)
        throw NumericalError("RWM started from a zero-density state");
    std::vector<ParameterPoint> retained;
    retained.reserve(static_cast<std::size_t>(n_samples - burn_in));
    ParameterPoint state = x_init;
    for (int i = 0; i < n_samples; ++i) {
        RwmResult r = rwm_step_cached(kernel, state, log_density, rng);
        state = std::move(r.state);
        log_density = r.log_density;
        if (i >= burn_in) retained.push_back(state);
    }
    return retained;
}

}  // namespace sequifilt
