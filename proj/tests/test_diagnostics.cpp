#include <doctest.h>

#include <cmath>
#include <vector>

#include "sequifilt/diagnostics.hpp"
#include "sequifilt/errors.hpp"
#include "sequifilt/models.hpp"

using namespace sequifilt;

namespace {

ParticleApproximation normal_cloud(std::size_t m, std::uint64_t seed,
                                   double mean = 0.0, double std = 1.0) {
    RngStream rng(seed);
    return ParticleApproximation::monte_carlo(
        [&](RngStream& r) { return ParameterPoint{r.normal(mean, std)}; }, m, rng);
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double area = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return area;
}

}  // namespace

TEST_CASE("silverman bandwidth and degenerate clouds") {
    auto a = normal_cloud(4000, 1);
    double h = silverman_bandwidth(a);
    double expected = 1.06 * std::sqrt(a.weighted_variance()[0]) *
                      std::pow(a.effective_sample_size(), -0.2);
    CHECK(h == doctest::Approx(expected).epsilon(1e-12));

    ParticleApproximation degenerate({{2.0}, {2.0}}, {0.0, 0.0});
    CHECK_THROWS_AS(silverman_bandwidth(degenerate), NumericalError);
    CHECK_THROWS_AS(kde(degenerate, {1.0, 2.0, 3.0}), NumericalError);
    CHECK_NOTHROW(kde(degenerate, {1.0, 2.0, 3.0}, 0.5));
}

TEST_CASE("single particle kde is the gaussian kernel") {
    ParticleApproximation a({{5.0}}, {0.0});
    std::vector<double> grid{3.0, 4.0, 5.0, 6.0, 7.0};
    auto est = kde(a, grid, 1.0);
    const double inv_sqrt_2pi = 0.3989422804014327;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double z = grid[i] - 5.0;
        CHECK(est.density[i] ==
              doctest::Approx(inv_sqrt_2pi * std::exp(-0.5 * z * z))
                  .epsilon(1e-12));
    }
}

TEST_CASE("kde integrates to about one and is nonnegative") {
    auto a = normal_cloud(5000, 3);
    double h = silverman_bandwidth(a);
    auto grid = kde_default_grid(a, h);
    auto est = kde(a, grid, h);
    for (double d : est.density) CHECK(d >= 0.0);
    double area = trapezoid(est.grid, est.density);
    CHECK(area > 0.98);
    CHECK(area <= 1.0 + 1e-9);
}

TEST_CASE("kde tracks the true density for many samples") {
    auto a = normal_cloud(100000, 4);
    double h = silverman_bandwidth(a);
    auto grid = kde_default_grid(a, h, 200);
    auto est = kde(a, grid, h);
    const double inv_sqrt_2pi = 0.3989422804014327;
    double max_dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double truth = inv_sqrt_2pi * std::exp(-0.5 * grid[i] * grid[i]);
        max_dev = std::max(max_dev, std::abs(est.density[i] - truth));
    }
    CHECK(max_dev < 0.02);
}

TEST_CASE("kde requires a strictly increasing grid") {
    auto a = normal_cloud(100, 5);
    CHECK_THROWS_AS(kde(a, {0.0, 0.0, 1.0}, 0.5), ConfigError);
    CHECK_THROWS_AS(kde(a, {1.0, 0.5}, 0.5), ConfigError);
}

TEST_CASE("convergence study recovers the 1/M rate") {
    RngStream data_rng = RngStream::derive(11, StreamId::Data);
    auto obs = GaussianMeanForwardModel::synthesize(0.4, 6, data_rng);
    GaussianMeanForwardModel model(obs);
    FilterConfig cfg;
    cfg.algorithm = Algorithm::SIS;
    cfg.seed = 2;
    auto result = convergence_study(model, one_per_step(6),
                                    {16, 32, 64, 128, 256}, 40, cfg);
    REQUIRE(result.rows.size() == 5);
    CHECK(result.slope > -1.5);
    CHECK(result.slope < -0.5);
    // deterministic given seeds
    auto again = convergence_study(model, one_per_step(6),
                                   {16, 32, 64, 128, 256}, 40, cfg);
    CHECK(again.slope == result.slope);
}

TEST_CASE("convergence study with a point-mass prior is exactly flat") {
    // degenerate model: prior is a point mass, likelihood constant
    class PointModel : public ForwardModel {
    public:
        std::size_t dimension() const override { return 1; }
        std::size_t observation_count() const override { return 2; }
        ParameterPoint sample_prior_point(RngStream&) const override {
            return {3.0};
        }
        double prior_log_density_at(const ParameterPoint&) const override {
            return 0.0;
        }
        std::vector<double> log_likelihoods(
            const ParameterPoint&,
            std::span<const std::size_t> obs) const override {
            return std::vector<double>(obs.size(), -0.5);
        }
    } model;
    FilterConfig cfg;
    cfg.algorithm = Algorithm::SIS;
    auto result = convergence_study(model, one_per_step(2), {8, 16}, 5, cfg);
    for (const auto& row : result.rows) {
        CHECK(row.mean_of_means == doctest::Approx(3.0));
        CHECK(row.variance_of_means == 0.0);
    }
}

TEST_CASE("deviation probability curve") {
    auto a = normal_cloud(4000, 6, 9.1, 0.25);
    std::vector<double> eps;
    for (int i = 0; i <= 20; ++i) eps.push_back(i * 0.01);
    auto probs = deviation_probability_curve(a, 9.808, eps);
    REQUIRE(probs.size() == eps.size());
    CHECK(probs.front() == 0.0);
    CHECK(probs.back() == doctest::Approx(1.0).epsilon(1e-3));
    for (std::size_t i = 1; i < probs.size(); ++i) CHECK(probs[i] >= probs[i - 1]);
}

TEST_CASE("sis error bound") {
    CHECK(sis_error_bound(1.0, 100) == doctest::Approx(0.04));
    CHECK(sis_error_bound(2.0, 8) == doctest::Approx(1.0));
    CHECK_THROWS_AS(sis_error_bound(0.5, 8), ConfigError);
    CHECK_THROWS_AS(sis_error_bound(2.0, 0), ConfigError);
}

TEST_CASE("sis error bound holds empirically on the conjugate model") {
    // squared error of the filter estimate of a bounded f, averaged over
    // seeds, stays below 4*rho_1/M
    RngStream data_rng = RngStream::derive(3, StreamId::Data);
    auto obs = GaussianMeanForwardModel::synthesize(0.0, 1, data_rng);
    GaussianMeanForwardModel model(obs);
    GaussianMeanModel oracle{0.0, obs[0], 1};
    auto [post_mean, post_var] = conjugate_posterior(oracle);
    double rho = rho_t(oracle);

    auto f = [](const ParameterPoint& p) {
        return std::clamp(p[0], -1.0, 1.0);
    };
    // exact posterior expectation of f via fine quadrature
    double exact = 0.0, norm = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
        double x = post_mean + i * 0.002;
        double w = std::exp(-0.5 * (x - post_mean) * (x - post_mean) / post_var);
        exact += w * std::clamp(x, -1.0, 1.0);
        norm += w;
    }
    exact /= norm;

    const std::size_t m = 64;
    const int reps = 500;
    double mse = 0.0;
    FilterConfig cfg;
    cfg.algorithm = Algorithm::SIS;
    cfg.particle_count = m;
    for (int s = 0; s < reps; ++s) {
        cfg.seed = static_cast<std::uint64_t>(s);
        auto trace = run_filter(model, one_per_step(1), cfg);
        double est = trace.final_particles->integrate(f);
        mse += (est - exact) * (est - exact);
    }
    mse /= reps;
    CHECK(mse <= sis_error_bound(rho, m));
}

TEST_CASE("weak distance properties") {
    auto a = normal_cloud(2000, 7);
    auto b = normal_cloud(2000, 8, 0.5);
    auto c = normal_cloud(2000, 9, 2.0);
    CHECK(weak_distance(a, a) == 0.0);
    CHECK(weak_distance(a, b) == doctest::Approx(weak_distance(b, a)));
    CHECK(weak_distance(a, b) > 0.0);
    // farther distribution is farther in the pseudo-metric
    CHECK(weak_distance(a, c) > weak_distance(a, b));
    // triangle inequality over a fixed family
    auto family = default_test_family(a, c);
    double ac = weak_distance(a, c, family);
    double ab = weak_distance(a, b, family);
    double bc = weak_distance(b, c, family);
    CHECK(ac <= ab + bc + 1e-12);
}

TEST_CASE("weak distance to the exact posterior shrinks with M") {
    RngStream data_rng = RngStream::derive(19, StreamId::Data);
    auto obs = GaussianMeanForwardModel::synthesize(0.2, 5, data_rng);
    GaussianMeanForwardModel model(obs);
    double sum = 0.0;
    for (double y : obs) sum += y;
    auto [post_mean, post_var] = conjugate_posterior({0.0, sum, 5});
    auto exact = normal_cloud(100000, 99, post_mean, std::sqrt(post_var));

    int votes = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        std::vector<double> dist;
        for (std::size_t m : {100, 1000, 10000}) {
            FilterConfig cfg;
            cfg.algorithm = Algorithm::SMC;
            cfg.particle_count = m;
            cfg.seed = static_cast<std::uint64_t>(s);
            auto trace = run_filter(model, one_per_step(5), cfg);
            dist.push_back(weak_distance(*trace.final_particles, exact));
        }
        if (dist[2] < dist[0]) ++votes;
    }
    CHECK(votes > seeds / 2);
}
