#include "sequifilt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sequifilt/errors.hpp"
#include "sequifilt/parallel.hpp"

namespace sequifilt {

namespace {
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_one_dimensional(const ParticleApproximation& approx) {
    if (approx.dimension() != 1)
        throw ConfigError("operation requires a one-dimensional approximation");
}
}  // namespace

double silverman_bandwidth(const ParticleApproximation& approx) {
    require_one_dimensional(approx);
    double sigma = std::sqrt(approx.weighted_variance()[0]);
    if (sigma == 0.0)
        throw NumericalError("degenerate sample: zero weighted variance");
    double ess = approx.effective_sample_size();
    return 1.06 * sigma * std::pow(ess, -0.2);
}

KdeEstimate kde(const ParticleApproximation& approx,
                const std::vector<double>& grid,
                std::optional<double> bandwidth) {
    require_one_dimensional(approx);
    if (grid.size() < 2) throw ConfigError("KDE grid needs at least two points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("KDE grid must be strictly increasing");
    double h = bandwidth ? *bandwidth : silverman_bandwidth(approx);
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");

    const auto& positions = approx.positions();
    std::vector<double> weights = approx.weights();
    KdeEstimate est;
    est.grid = grid;
    est.bandwidth = h;
    est.density.assign(grid.size(), 0.0);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double acc = 0.0;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            double z = (grid[gi] - positions[i][0]) / h;
            acc += weights[i] * std::exp(-0.5 * z * z);
        }
        est.density[gi] = acc * kInvSqrt2Pi / h;
    }
    return est;
}

std::vector<double> kde_default_grid(const ParticleApproximation& approx,
                                     double bandwidth, std::size_t points,
                                     double pad_bandwidths) {
    require_one_dimensional(approx);
    if (points < 2) throw ConfigError("grid needs at least two points");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& x : approx.positions()) {
        lo = std::min(lo, x[0]);
        hi = std::max(hi, x[0]);
    }
    lo -= pad_bandwidths * bandwidth;
    hi += pad_bandwidths * bandwidth;
    std::vector<double> grid(points);
    double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + step * static_cast<double>(i);
    return grid;
}

ConvergenceResult convergence_study(
    const ForwardModel& model, const std::vector<std::vector<std::size_t>>& batches,
    const std::vector<std::size_t>& particle_counts, int repetitions,
    const FilterConfig& config_template) {
    if (repetitions < 2)
        throw ConfigError("convergence study requires at least two repetitions");
    if (particle_counts.empty())
        throw ConfigError("convergence study requires particle counts");

    ConvergenceResult result;
    struct Job {
        std::size_t m_index;
        int rep;
    };
    std::vector<Job> jobs;
    for (std::size_t mi = 0; mi < particle_counts.size(); ++mi)
        for (int r = 0; r < repetitions; ++r) jobs.push_back({mi, r});

    std::vector<double> means(jobs.size());
    int threads = config_template.threads;
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        FilterConfig cfg = config_template;
        cfg.particle_count = particle_counts[jobs[j].m_index];
        cfg.threads = 1;
        // Per-repetition seeds derive from (base seed, M, repetition).
        std::uint64_t state = config_template.seed;
        splitmix64_next(state);
        state ^= static_cast<std::uint64_t>(StreamId::Study) *
                 UINT64_C(0xD6E8FEB86659FD93);
        splitmix64_next(state);
        state ^= cfg.particle_count * UINT64_C(0xA3EC647659359ACD);
        splitmix64_next(state);
        state ^= static_cast<std::uint64_t>(jobs[j].rep) *
                 UINT64_C(0x9E6C63D0876A9A47);
        cfg.seed = splitmix64_next(state);
        FilterTrace trace = run_filter(model, batches, cfg);
        means[j] = trace.steps.back().posterior_mean[0];
    });

    std::size_t cursor = 0;
    for (std::size_t mi = 0; mi < particle_counts.size(); ++mi) {
        double sum = 0.0, sum2 = 0.0;
        for (int r = 0; r < repetitions; ++r) {
            double v = means[cursor++];
            sum += v;
            sum2 += v * v;
        }
        double n = static_cast<double>(repetitions);
        double mean = sum / n;
        double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
        result.rows.push_back({particle_counts[mi], mean, var});
    }

    // Least-squares slope of log(var) against log(M); rows with zero variance
    // are excluded (a point-mass study would otherwise produce -inf).
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const auto& row : result.rows) {
        if (!(row.variance_of_means > 0.0)) continue;
        double x = std::log(static_cast<double>(row.particles));
        double y = std::log(row.variance_of_means);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) {
        double denom = static_cast<double>(n) * sxx - sx * sx;
        result.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    }
    return result;
}

std::vector<double> deviation_probability_curve(const ParticleApproximation& approx,
                                                double g_true,
                                                const std::vector<double>& epsilons) {
    require_one_dimensional(approx);
    if (!(g_true > 0.0)) throw ConfigError("true parameter must be positive");
    std::vector<double> probabilities;
    probabilities.reserve(epsilons.size());
    for (double eps : epsilons) {
        probabilities.push_back(approx.event_probability(
            [&](const ParameterPoint& x) {
                return std::abs(x[0] - g_true) < eps * g_true;
            }));
    }
    return probabilities;
}

double sis_error_bound(double rho, std::size_t particles) {
    if (!(rho >= 1.0)) throw ConfigError("rho must be >= 1");
    if (particles < 1) throw ConfigError("particle count must be >= 1");
    return 4.0 * rho / static_cast<double>(particles);
}

std::vector<std::function<double(const ParameterPoint&)>>
default_test_family(const ParticleApproximation& a, const ParticleApproximation& b) {
    require_one_dimensional(a);
    require_one_dimensional(b);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* approx : {&a, &b}) {
        for (const auto& x : approx->positions()) {
            lo = std::min(lo, x[0]);
            hi = std::max(hi, x[0]);
        }
    }
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
    constexpr std::size_t kCenters = 21;
    const double scales[] = {0.5, 1.0, 2.0, 4.0};
    std::vector<std::function<double(const ParameterPoint&)>> family;
    family.reserve(kCenters * std::size(scales));
    for (std::size_t i = 0; i < kCenters; ++i) {
        double c = lo + (hi - lo) * static_cast<double>(i) /
                            static_cast<double>(kCenters - 1);
        for (double alpha : scales) {
            family.push_back([c, alpha](const ParameterPoint& x) {
                return std::tanh(alpha * (x[0] - c));
            });
        }
    }
    return family;
}

double weak_distance(
    const ParticleApproximation& a, const ParticleApproximation& b,
    const std::vector<std::function<double(const ParameterPoint&)>>& test_functions) {
    if (a.dimension() != b.dimension())
        throw ConfigError("weak distance requires equal parameter dimensions");
    double dist = 0.0;
    for (const auto& f : test_functions)
        dist = std::max(dist, std::abs(a.integrate(f) - b.integrate(f)));
    return dist;
}

double weak_distance(const ParticleApproximation& a, const ParticleApproximation& b) {
    return weak_distance(a, b, default_test_family(a, b));
}

}  // namespace sequifilt
