#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "sequifilt/errors.hpp"
#include "sequifilt/logsumexp.hpp"
#include "sequifilt/particle.hpp"

using namespace sequifilt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ParticleApproximation make1d(std::vector<double> xs, std::vector<double> ws) {
    std::vector<ParameterPoint> pos;
    std::vector<double> lw;
    for (double x : xs) pos.push_back({x});
    for (double w : ws) lw.push_back(w > 0.0 ? std::log(w) : -kInf);
    return ParticleApproximation(std::move(pos), std::move(lw));
}

double lse(const ParticleApproximation& a) { return log_sum_exp(a.log_weights()); }

}  // namespace

TEST_CASE("construction validates and normalizes") {
    auto a = make1d({1.0, 2.0}, {2.0, 6.0});  // unnormalized input weights
    CHECK(lse(a) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.weights()[0] == doctest::Approx(0.25));
    CHECK(a.weights()[1] == doctest::Approx(0.75));

    CHECK_THROWS_AS(ParticleApproximation({}, {}), ConfigError);
    CHECK_THROWS_AS(ParticleApproximation({{1.0}, {2.0, 3.0}}, {0.0, 0.0}),
                    ConfigError);
    CHECK_THROWS_AS(ParticleApproximation({{kInf}}, {0.0}), NumericalError);
    CHECK_THROWS_AS(ParticleApproximation({{1.0}}, {std::nan("")}), NumericalError);
    CHECK_THROWS_AS(ParticleApproximation({{1.0}}, {kInf}), NumericalError);
    // all weights zero
    CHECK_THROWS(ParticleApproximation({{1.0}, {2.0}}, {-kInf, -kInf}));
}

TEST_CASE("monte_carlo uniform weights") {
    RngStream rng(42);
    auto a = ParticleApproximation::monte_carlo(
        [](RngStream&) { return ParameterPoint{5.0}; }, 4, rng);
    CHECK(a.size() == 4);
    for (double w : a.weights()) CHECK(w == doctest::Approx(0.25));
    for (const auto& p : a.positions()) CHECK(p[0] == 5.0);

    auto single = ParticleApproximation::monte_carlo(
        [](RngStream& r) { return ParameterPoint{r.normal()}; }, 1, rng);
    CHECK(single.weights()[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(ParticleApproximation::monte_carlo(
                        [](RngStream&) { return ParameterPoint{kInf}; }, 3, rng),
                    NumericalError);
}

TEST_CASE("monte_carlo truncated-normal mean within CLT bound") {
    RngStream rng(7);
    auto sampler = [](RngStream& r) {
        double g;
        do {
            g = r.normal(10.0, 1.0);
        } while (g < 0.0 || g > 20.0);
        return ParameterPoint{g};
    };
    auto a = ParticleApproximation::monte_carlo(sampler, 2500, rng);
    CHECK(std::abs(a.weighted_mean()[0] - 10.0) < 3.0 / std::sqrt(2500.0));
}

TEST_CASE("integrate") {
    auto a = make1d({1.0, 3.0}, {0.5, 0.5});
    CHECK(a.integrate([](const ParameterPoint& p) { return p[0]; }) ==
          doctest::Approx(2.0));
    CHECK(a.integrate([](const ParameterPoint&) { return 1.0; }) ==
          doctest::Approx(1.0));

    auto b = make1d({0.0, 2.0, 4.0}, {0.25, 0.5, 0.25});
    CHECK(b.integrate([](const ParameterPoint& p) { return p[0] * p[0]; }) ==
          doctest::Approx(6.0));

    CHECK_THROWS_AS(
        a.integrate([](const ParameterPoint&) { return std::nan(""); }),
        NumericalError);
}

TEST_CASE("integrate evaluates f even at zero-weight particles") {
    auto a = make1d({1.0, 2.0}, {1.0, 0.0});
    CHECK_THROWS_AS(a.integrate([](const ParameterPoint& p) {
        return p[0] > 1.5 ? std::nan("") : p[0];
    }),
                    NumericalError);
}

TEST_CASE("integrate is linear") {
    auto a = make1d({-1.0, 0.5, 2.0, 7.0}, {0.1, 0.2, 0.3, 0.4});
    auto f = [](const ParameterPoint& p) { return std::sin(p[0]); };
    auto g = [](const ParameterPoint& p) { return p[0] * p[0]; };
    double lhs = a.integrate([&](const ParameterPoint& p) {
        return 2.5 * f(p) - 1.25 * g(p);
    });
    double rhs = 2.5 * a.integrate(f) - 1.25 * a.integrate(g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("event_probability") {
    auto a = make1d({3.0, 4.0, 5.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(a.event_probability([](const ParameterPoint&) { return true; }) == 1.0);
    CHECK(a.event_probability([](const ParameterPoint&) { return false; }) == 0.0);
    CHECK(a.event_probability([](const ParameterPoint& p) { return p[0] >= 4.0; }) ==
          doctest::Approx(2.0 / 3));
}

TEST_CASE("reweight discrete uniform example") {
    std::vector<double> xs, ws;
    for (int k = 1; k <= 10; ++k) {
        xs.push_back(static_cast<double>(k));
        ws.push_back(0.1);
    }
    auto a = make1d(xs, ws);
    auto [b, log_z] = a.reweight([](const ParameterPoint& p) {
        return (p[0] >= 3.0 && p[0] <= 5.0) ? 0.0 : -kInf;
    });
    CHECK(log_z == doctest::Approx(std::log(0.3)).epsilon(1e-12));
    auto w = b.weights();
    for (int k = 0; k < 10; ++k) {
        if (k >= 2 && k <= 4)
            CHECK(w[static_cast<std::size_t>(k)] == doctest::Approx(1.0 / 3));
        else
            CHECK(w[static_cast<std::size_t>(k)] == 0.0);
    }
    CHECK(b.positions() == a.positions());
}

TEST_CASE("reweight constant likelihood") {
    auto a = make1d({1.0, 2.0, 3.0}, {0.2, 0.3, 0.5});
    auto [b, log_z] = a.reweight([](const ParameterPoint&) { return -4.2; });
    CHECK(log_z == doctest::Approx(-4.2).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(b.log_weights()[i] ==
              doctest::Approx(a.log_weights()[i]).epsilon(1e-10));
}

TEST_CASE("reweight two-particle hand example") {
    auto a = make1d({0.0, 1.0}, {0.5, 0.5});
    auto [b, log_z] = a.reweight([](const ParameterPoint& p) {
        return std::log(p[0] < 0.5 ? 1.0 : 3.0);
    });
    CHECK(b.weights()[0] == doctest::Approx(0.25));
    CHECK(b.weights()[1] == doctest::Approx(0.75));
    CHECK(log_z == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("reweight collapse raises") {
    auto a = make1d({1.0, 2.0}, {0.5, 0.5});
    CHECK_THROWS_AS(a.reweight([](const ParameterPoint&) { return -kInf; }),
                    NumericalError);
    // a particle with zero weight and finite likelihood cannot rescue
    auto b = make1d({1.0, 2.0}, {0.0, 1.0});
    CHECK_THROWS_AS(b.reweight([](const ParameterPoint& p) {
        return p[0] < 1.5 ? 0.0 : -kInf;
    }),
                    NumericalError);
}

TEST_CASE("reweight-then-integrate matches brute force in long double") {
    RngStream rng(123);
    const std::size_t m = 16;
    std::vector<double> xs, ws;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        xs.push_back(rng.normal(0.0, 2.0));
        ws.push_back(rng.uniform_positive());
        total += ws.back();
    }
    for (double& w : ws) w /= total;
    auto a = make1d(xs, ws);
    auto loglik = [](const ParameterPoint& p) {
        return -0.5 * (p[0] - 1.0) * (p[0] - 1.0);
    };
    auto f = [](const ParameterPoint& p) { return std::tanh(p[0]); };
    auto [b, log_z] = a.reweight(loglik);
    double got = b.integrate(f);

    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
        long double li = expl(static_cast<long double>(loglik({xs[i]})));
        num += static_cast<long double>(ws[i]) * li *
               static_cast<long double>(f({xs[i]}));
        den += static_cast<long double>(ws[i]) * li;
    }
    double expected = static_cast<double>(num / den);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    CHECK(log_z == doctest::Approx(static_cast<double>(logl(den))).epsilon(1e-12));
    CHECK(lse(b) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("effective sample size") {
    std::vector<double> xs(2500, 1.0), ws(2500, 1.0 / 2500);
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = static_cast<double>(i);
    CHECK(make1d(xs, ws).effective_sample_size() ==
          doctest::Approx(2500.0).epsilon(1e-10));

    std::vector<double> xs2(100), ws2(100, 0.0);
    for (std::size_t i = 0; i < 100; ++i) xs2[i] = static_cast<double>(i);
    ws2[17] = 1.0;
    CHECK(make1d(xs2, ws2).effective_sample_size() == doctest::Approx(1.0));

    CHECK(make1d({0.0, 1.0}, {0.75, 0.25}).effective_sample_size() ==
          doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("ess bounded by [1, M]") {
    RngStream rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> xs, ws;
        double total = 0.0;
        for (int i = 0; i < 37; ++i) {
            xs.push_back(rng.normal());
            ws.push_back(std::exp(3.0 * rng.normal()));
            total += ws.back();
        }
        for (double& w : ws) w /= total;
        double ess = make1d(xs, ws).effective_sample_size();
        CHECK(ess >= 1.0 - 1e-9);
        CHECK(ess <= 37.0 + 1e-9);
    }
}

TEST_CASE("resample point mass") {
    std::vector<double> xs(2), ws(2, 0.0);
    xs[0] = 3.14;
    xs[1] = 2.71;
    ws[0] = 1.0;
    RngStream rng(5);
    auto many = make1d({3.14, 2.71}, {1.0, 0.0});
    // resample to the same M; every survivor is the point mass
    auto r = many.resample(rng);
    for (const auto& p : r.positions()) CHECK(p[0] == 3.14);
    for (double w : r.weights()) CHECK(w == doctest::Approx(0.5));
}

TEST_CASE("resample counts follow the weights") {
    const std::size_t m = 10000;
    std::vector<double> xs(m), ws(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = i < m / 2 ? 0.0 : 1.0;
        ws[i] = i < m / 2 ? 0.8 / (m / 2) : 0.2 / (m / 2);
    }
    RngStream rng(11);
    auto r = make1d(xs, ws).resample(rng);
    std::size_t zeros = 0;
    for (const auto& p : r.positions()) zeros += p[0] == 0.0 ? 1 : 0;
    double sd = std::sqrt(m * 0.8 * 0.2);
    CHECK(std::abs(static_cast<double>(zeros) - 0.8 * m) < 3.0 * sd);
    for (double w : r.weights()) CHECK(w == doctest::Approx(1.0 / m));
}

TEST_CASE("resample output positions are input positions") {
    RngStream rng(13);
    auto a = make1d({1.5, 2.5, 3.5, 4.5}, {0.1, 0.4, 0.4, 0.1});
    auto r = a.resample(rng);
    for (const auto& p : r.positions()) {
        bool found = false;
        for (const auto& q : a.positions()) found = found || q == p;
        CHECK(found);
    }
    CHECK(lse(r) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("resample is unbiased over 200 seeds") {
    auto a = make1d({1.0, 2.0, 4.0, 8.0}, {0.4, 0.3, 0.2, 0.1});
    double target = a.weighted_mean()[0];
    const int reps = 200;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < reps; ++s) {
        RngStream rng(static_cast<std::uint64_t>(s) + 1000);
        double mean = a.resample(rng).weighted_mean()[0];
        sum += mean;
        sumsq += mean * mean;
    }
    double avg = sum / reps;
    double var = (sumsq / reps - avg * avg) * reps / (reps - 1.0);
    double se = std::sqrt(var / reps);
    CHECK(std::abs(avg - target) < 4.0 * se);
}

TEST_CASE("weighted mean and variance") {
    auto a = make1d({1.0, 3.0}, {0.5, 0.5});
    CHECK(a.weighted_mean()[0] == doctest::Approx(2.0));
    CHECK(a.weighted_variance()[0] == doctest::Approx(1.0));

    auto single = make1d({4.2}, {1.0});
    CHECK(single.weighted_variance()[0] == 0.0);

    auto b = make1d({0.0, 2.0, 4.0}, {0.25, 0.5, 0.25});
    CHECK(b.weighted_mean()[0] == doctest::Approx(2.0));
    CHECK(b.weighted_variance()[0] == doctest::Approx(2.0));
}

TEST_CASE("csv round trip") {
    auto a = make1d({1.0 / 3.0, 2.0e-17, -7.125}, {0.25, 0.5, 0.25});
    std::stringstream ss;
    a.write_csv(ss);
    auto b = ParticleApproximation::read_csv(ss);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b.positions()[i][0] == a.positions()[i][0]);
        CHECK(b.log_weights()[i] ==
              doctest::Approx(a.log_weights()[i]).epsilon(1e-12));
    }
}

TEST_CASE("resample decision") {
    CHECK(make_resample_decision(1875.0, 1875.0).resampled);
    CHECK(make_resample_decision(1874.9, 1875.0).resampled);
    CHECK_FALSE(make_resample_decision(1875.1, 1875.0).resampled);
}

TEST_CASE("log_sum_exp basics") {
    std::vector<double> v{0.0, 0.0};
    CHECK(log_sum_exp(v) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    std::vector<double> big{1000.0, 1000.0};
    CHECK(log_sum_exp(big) ==
          doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
    std::vector<double> none{-kInf, -kInf};
    CHECK(log_sum_exp(none) == -kInf);
}
