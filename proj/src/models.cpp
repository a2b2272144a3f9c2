#include "sequifilt/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "sequifilt/errors.hpp"

namespace sequifilt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

struct PendulumState {
    double angle;
    double velocity;
};

// One classical RK4 step of x'' = -omega2 * sin(x).
inline PendulumState rk4_step(const PendulumState& s, double omega2, double dt) {
    auto acc = [omega2](double x) { return -omega2 * std::sin(x); };
    double k1x = s.velocity, k1v = acc(s.angle);
    double k2x = s.velocity + 0.5 * dt * k1v, k2v = acc(s.angle + 0.5 * dt * k1x);
    double k3x = s.velocity + 0.5 * dt * k2v, k3v = acc(s.angle + 0.5 * dt * k2x);
    double k4x = s.velocity + dt * k3v, k4v = acc(s.angle + dt * k3x);
    return {s.angle + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            s.velocity + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

// Advance from t_now to t_target with uniform steps of size h, shortening
// the final step to land exactly on t_target.
PendulumState advance(PendulumState s, double t_now, double t_target, double h,
                      double omega2) {
    double remaining = t_target - t_now;
    while (remaining > 0.0) {
        double dt = std::min(h, remaining);
        s = rk4_step(s, omega2, dt);
        remaining -= dt;
        if (!std::isfinite(s.angle) || !std::isfinite(s.velocity))
            throw NumericalError(fmt::format(
                "pendulum integration diverged near t = {}", t_target - remaining));
    }
    return s;
}

}  // namespace

void PendulumConfig::validate() const {
    if (!(length > 0.0)) throw ConfigError("pendulum length must be positive");
    if (!(rk4_step > 0.0)) throw ConfigError("rk4_step must be positive");
    if (!(std::abs(initial_angle) < kPi))
        throw ConfigError("initial angle must satisfy |x0| < pi");
    if (!std::isfinite(initial_velocity))
        throw ConfigError("initial velocity must be finite");
}

double reference_gravity(double latitude_deg, double altitude_m) {
    double phi = latitude_deg * kPi / 180.0;
    double s1 = std::sin(phi);
    double s2 = std::sin(2.0 * phi);
    return 9.780327 * (1.0 + 5.3024e-3 * s1 * s1 - 5.8e-6 * s2 * s2) -
           1.965e-6 * altitude_m;
}

double pendulum_angle(double gravity, double tau, const PendulumConfig& config) {
    config.validate();
    if (gravity < 0.0) throw ConfigError("gravity must be nonnegative");
    if (tau < 0.0) throw ConfigError("observation time must be nonnegative");
    PendulumState s{config.initial_angle, config.initial_velocity};
    s = advance(s, 0.0, tau, config.rk4_step, gravity / config.length);
    return s.angle;
}

std::vector<double> pendulum_angles(double gravity, std::span<const double> taus,
                                    const PendulumConfig& config) {
    config.validate();
    if (gravity < 0.0) throw ConfigError("gravity must be nonnegative");
    std::vector<std::size_t> order(taus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return taus[a] < taus[b]; });

    std::vector<double> out(taus.size());
    PendulumState s{config.initial_angle, config.initial_velocity};
    double t_now = 0.0;
    double omega2 = gravity / config.length;
    for (std::size_t idx : order) {
        double tau = taus[idx];
        if (tau < 0.0) throw ConfigError("observation time must be nonnegative");
        s = advance(s, t_now, tau, config.rk4_step, omega2);
        t_now = tau;
        out[idx] = s.angle;
    }
    return out;
}

double linear_pendulum_angle(double gravity, double tau,
                             const PendulumConfig& config) {
    config.validate();
    if (config.initial_velocity != 0.0)
        throw ConfigError(
            "linearized pendulum solution requires zero initial velocity");
    if (gravity < 0.0) throw ConfigError("gravity must be nonnegative");
    return config.initial_angle * std::cos(tau * std::sqrt(gravity / config.length));
}

std::vector<double> zero_crossing_times(double gravity, std::size_t count,
                                        const PendulumConfig& config) {
    config.validate();
    if (!(gravity > 0.0)) throw ConfigError("gravity must be positive");
    if (count == 0) return {};
    if (config.initial_angle == 0.0 && config.initial_velocity == 0.0)
        throw ConfigError("trajectory is identically zero; no crossings");

    std::vector<double> crossings;
    double scan = config.rk4_step * 10.0;
    PendulumState s{config.initial_angle, config.initial_velocity};
    double t_prev = 0.0;
    double x_prev = s.angle;
    double omega2 = gravity / config.length;
    const double max_horizon = 1e6;
    while (crossings.size() < count) {
        double t_next = t_prev + scan;
        if (t_next > max_horizon)
            throw NumericalError("zero-crossing scan exceeded horizon");
        s = advance(s, t_prev, t_next, config.rk4_step, omega2);
        double x_next = s.angle;
        if ((x_prev > 0.0 && x_next <= 0.0) || (x_prev < 0.0 && x_next >= 0.0)) {
            // bisect on a from-zero solve so the refined time is schedule-exact
            double lo = t_prev, hi = t_next;
            double f_lo = x_prev;
            for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
                double mid = 0.5 * (lo + hi);
                double f_mid = pendulum_angle(gravity, mid, config);
                if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push_back(0.5 * (lo + hi));
        }
        t_prev = t_next;
        x_prev = x_next;
    }
    return crossings;
}

ScaledPendulumSolution::ScaledPendulumSolution(const PendulumConfig& config,
                                               double max_scaled_time) {
    config.validate();
    if (config.initial_velocity != 0.0)
        throw ConfigError("scaled pendulum solution requires zero initial velocity");
    if (!(max_scaled_time >= 0.0))
        throw ConfigError("scaled time horizon must be nonnegative");
    length_ = config.length;
    step_ = 5e-4;
    std::size_t n = static_cast<std::size_t>(std::ceil(max_scaled_time / step_)) + 2;
    angle_.reserve(n + 1);
    velocity_.reserve(n + 1);
    PendulumState s{config.initial_angle, 0.0};
    angle_.push_back(s.angle);
    velocity_.push_back(s.velocity);
    for (std::size_t i = 0; i < n; ++i) {
        s = rk4_step(s, 1.0, step_);
        angle_.push_back(s.angle);
        velocity_.push_back(s.velocity);
    }
}

double ScaledPendulumSolution::angle_at(double scaled_time) const {
    if (scaled_time < 0.0)
        throw ConfigError("scaled time must be nonnegative");
    double pos = scaled_time / step_;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= angle_.size())
        throw ConfigError("scaled time beyond precomputed horizon");
    // Cubic Hermite with the stored velocities as slopes.
    double t = pos - static_cast<double>(i);
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    double h10 = t3 - 2.0 * t2 + t;
    double h01 = -2.0 * t3 + 3.0 * t2;
    double h11 = t3 - t2;
    return h00 * angle_[i] + h10 * step_ * velocity_[i] + h01 * angle_[i + 1] +
           h11 * step_ * velocity_[i + 1];
}

double ScaledPendulumSolution::angle(double gravity, double tau) const {
    if (gravity < 0.0) throw ConfigError("gravity must be nonnegative");
    return angle_at(tau * std::sqrt(gravity / length_));
}

void TruncatedNormalPrior::validate() const {
    if (!(lower < upper)) throw ConfigError("prior requires lower < upper");
    if (!(std > 0.0)) throw ConfigError("prior std must be positive");
}

double sample_prior(const TruncatedNormalPrior& prior, RngStream& rng) {
    prior.validate();
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        double g = rng.normal(prior.mean, prior.std);
        if (g >= prior.lower && g <= prior.upper) return g;
    }
    throw ConfigError(
        "truncated-normal sampling failed: support carries no effective mass");
}

double prior_log_density(const TruncatedNormalPrior& prior, double g) {
    prior.validate();
    if (g < prior.lower || g > prior.upper) return kNegInf;
    double z = (g - prior.mean) / prior.std;
    return -0.5 * z * z;
}

void GaussianNoise::validate() const {
    if (!(variance > 0.0)) throw ConfigError("noise variance must be positive");
}

double gaussian_log_likelihood(double y, double prediction,
                               const GaussianNoise& noise) {
    noise.validate();
    double r = y - prediction;
    return -r * r / (2.0 * noise.variance);
}

double calibrate_noise_variance(const PendulumConfig& config, double g_nominal,
                                std::span<const double> schedule, int n_mc,
                                RngStream& rng, double time_noise_mean,
                                double time_noise_std) {
    if (n_mc < 100) throw ConfigError("noise calibration requires n_mc >= 100");
    if (schedule.empty()) throw ConfigError("noise calibration requires a schedule");
    std::vector<double> nominal = pendulum_angles(g_nominal, schedule, config);

    // The perturbed times stay within a few noise stddevs of the schedule, so
    // a shared rescaled trajectory covers every replicate when v0 = 0.
    std::unique_ptr<ScaledPendulumSolution> table;
    double omega = std::sqrt(g_nominal / config.length);
    if (config.initial_velocity == 0.0) {
        double max_tau = *std::max_element(schedule.begin(), schedule.end());
        double horizon = (max_tau + std::abs(time_noise_mean) +
                          12.0 * std::abs(time_noise_std) + 1.0) * omega;
        table = std::make_unique<ScaledPendulumSolution>(config, horizon);
    }

    double pooled = 0.0;
    std::size_t terms = 0;
    std::vector<double> perturbed(schedule.size());
    for (int r = 0; r < n_mc; ++r) {
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            double t = schedule[i] + rng.normal(time_noise_mean, time_noise_std);
            perturbed[i] = std::max(0.0, t);
        }
        if (table) {
            for (std::size_t i = 0; i < schedule.size(); ++i) {
                double d = table->angle_at(perturbed[i] * omega) - nominal[i];
                pooled += d * d;
                ++terms;
            }
        } else {
            std::vector<double> angles =
                pendulum_angles(g_nominal, perturbed, config);
            for (std::size_t i = 0; i < schedule.size(); ++i) {
                double d = angles[i] - nominal[i];
                pooled += d * d;
                ++terms;
            }
        }
    }
    return pooled / static_cast<double>(terms);
}

std::pair<double, double> conjugate_posterior(const GaussianMeanModel& model) {
    if (model.count < 0) throw ConfigError("observation count must be nonnegative");
    double t1 = static_cast<double>(model.count) + 1.0;
    return {model.running_sum / t1, 1.0 / t1};
}

double rho_t(const GaussianMeanModel& model) {
    if (model.count < 0) throw ConfigError("observation count must be nonnegative");
    double t = static_cast<double>(model.count);
    double s = model.running_sum;
    return (t + 1.0) / std::sqrt(2.0 * t + 1.0) *
           std::exp(s * s / ((2.0 * t + 1.0) * (t + 1.0)));
}

double ForwardModel::log_likelihood(const ParameterPoint& x,
                                    std::size_t obs_index) const {
    std::size_t idx[1] = {obs_index};
    return log_likelihoods(x, idx)[0];
}

double ForwardModel::joint_log_density(const ParameterPoint& x,
                                       std::span<const std::size_t> obs) const {
    double prior = prior_log_density_at(x);
    if (prior == kNegInf) return kNegInf;
    std::vector<double> terms = log_likelihoods(x, obs);
    double total = prior;
    for (double t : terms) {
        if (t == kNegInf) return kNegInf;
        total += t;
    }
    return total;
}

PendulumModel::PendulumModel(PendulumConfig config, TruncatedNormalPrior prior,
                             GaussianNoise noise,
                             std::vector<double> observation_times,
                             std::vector<double> observed_angles)
    : config_(config),
      prior_(prior),
      noise_(noise),
      times_(std::move(observation_times)),
      angles_(std::move(observed_angles)) {
    config_.validate();
    prior_.validate();
    noise_.validate();
    if (times_.size() != angles_.size())
        throw ConfigError("observation times/angles length mismatch");
    for (double t : times_)
        if (!(t > 0.0) || !std::isfinite(t))
            throw ConfigError("observation times must be finite and positive");
    if (config_.initial_velocity == 0.0 && !times_.empty()) {
        double max_tau = *std::max_element(times_.begin(), times_.end());
        double g_max = std::max(prior_.upper, 1.0);
        double horizon = max_tau * std::sqrt(g_max / config_.length) + 1.0;
        scaled_ = std::make_unique<ScaledPendulumSolution>(config_, horizon);
    }
}

ParameterPoint PendulumModel::sample_prior_point(RngStream& rng) const {
    return {sample_prior(prior_, rng)};
}

double PendulumModel::prior_log_density_at(const ParameterPoint& x) const {
    return prior_log_density(prior_, x.at(0));
}

std::vector<double> PendulumModel::log_likelihoods(
    const ParameterPoint& x, std::span<const std::size_t> obs) const {
    double g = x.at(0);
    std::vector<double> out(obs.size());
    if (scaled_ && g >= 0.0) {
        double omega = std::sqrt(g / config_.length);
        for (std::size_t i = 0; i < obs.size(); ++i) {
            std::size_t s = obs[i];
            double pred = scaled_->angle_at(times_.at(s) * omega);
            out[i] = gaussian_log_likelihood(angles_[s], pred, noise_);
        }
        return out;
    }
    std::vector<double> taus(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) taus[i] = times_.at(obs[i]);
    std::vector<double> preds = pendulum_angles(g, taus, config_);
    for (std::size_t i = 0; i < obs.size(); ++i)
        out[i] = gaussian_log_likelihood(angles_[obs[i]], preds[i], noise_);
    return out;
}

GaussianMeanForwardModel::GaussianMeanForwardModel(std::vector<double> observations)
    : observations_(std::move(observations)) {
    for (double y : observations_)
        if (!std::isfinite(y))
            throw ConfigError("gaussian-mean observations must be finite");
}

std::vector<double> GaussianMeanForwardModel::synthesize(double true_mean,
                                                         std::size_t count,
                                                         RngStream& rng) {
    std::vector<double> out(count);
    for (double& y : out) y = true_mean + rng.normal();
    return out;
}

ParameterPoint GaussianMeanForwardModel::sample_prior_point(RngStream& rng) const {
    return {rng.normal()};
}

double GaussianMeanForwardModel::prior_log_density_at(const ParameterPoint& x) const {
    double m = x.at(0);
    return -0.5 * m * m;
}

std::vector<double> GaussianMeanForwardModel::log_likelihoods(
    const ParameterPoint& x, std::span<const std::size_t> obs) const {
    double m = x.at(0);
    std::vector<double> out(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double r = observations_.at(obs[i]) - m;
        out[i] = -0.5 * r * r;
    }
    return out;
}

}  // namespace sequifilt
