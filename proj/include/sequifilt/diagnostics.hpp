#ifndef SEQUIFILT_DIAGNOSTICS_HPP
#define SEQUIFILT_DIAGNOSTICS_HPP

#include <functional>
#include <optional>
#include <vector>

#include "sequifilt/filters.hpp"
#include "sequifilt/particle.hpp"

namespace sequifilt {

struct KdeEstimate {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
};

// Silverman's rule with the effective sample size in place of the sample
// count: 1.06 * weighted_std * ess^(-1/5).
double silverman_bandwidth(const ParticleApproximation& approx);

// Weighted Gaussian KDE of a one-dimensional approximation on the given grid.
// Throws NumericalError when the weighted variance is zero and no bandwidth
// is supplied.
KdeEstimate kde(const ParticleApproximation& approx,
                const std::vector<double>& grid,
                std::optional<double> bandwidth = std::nullopt);

// Uniform grid spanning the weighted sample range plus `pad_bandwidths`
// bandwidths on each side.
std::vector<double> kde_default_grid(const ParticleApproximation& approx,
                                     double bandwidth, std::size_t points = 256,
                                     double pad_bandwidths = 5.0);

struct ConvergenceRow {
    std::size_t particles = 0;
    double mean_of_means = 0.0;
    double variance_of_means = 0.0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;  // least-squares slope of log(var) vs log(M)
};

// Repeats the filter for every particle count with derived per-repetition
// seeds and summarizes the spread of the final-step posterior-mean estimate.
ConvergenceResult convergence_study(
    const ForwardModel& model, const std::vector<std::vector<std::size_t>>& batches,
    const std::vector<std::size_t>& particle_counts, int repetitions,
    const FilterConfig& config_template);

// mu(|g - g_true| < eps * g_true) for each epsilon; nondecreasing output.
std::vector<double> deviation_probability_curve(const ParticleApproximation& approx,
                                                double g_true,
                                                const std::vector<double>& epsilons);

// Importance-sampling error bound 4 * rho / M on bounded test functions.
double sis_error_bound(double rho, std::size_t particles);

// Max over a family of bounded Lipschitz test functions of |a(f) - b(f)|.
// The default family is tanh(alpha * (x - c)) over a grid of centers spanning
// both supports and scales {0.5, 1, 2, 4}; one-dimensional approximations only.
double weak_distance(const ParticleApproximation& a, const ParticleApproximation& b);
double weak_distance(
    const ParticleApproximation& a, const ParticleApproximation& b,
    const std::vector<std::function<double(const ParameterPoint&)>>& test_functions);

std::vector<std::function<double(const ParameterPoint&)>>
default_test_family(const ParticleApproximation& a, const ParticleApproximation& b);

}  // namespace sequifilt

#endif
