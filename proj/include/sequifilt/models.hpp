#ifndef SEQUIFILT_MODELS_HPP
#define SEQUIFILT_MODELS_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sequifilt/particle.hpp"
#include "sequifilt/rng.hpp"

namespace sequifilt {

// ---------------------------------------------------------------------------
// Pendulum forward model
// ---------------------------------------------------------------------------

struct PendulumConfig {
    double length = 7.4;             // string length, m
    double initial_angle = 0.0;      // x0, rad (|x0| < pi)
    double initial_velocity = 0.0;   // v0, rad/s
    double rk4_step = 1e-3;          // s

    void validate() const;
};

// Closed-form local gravity from latitude (degrees) and altitude (m).
double reference_gravity(double latitude_deg, double altitude_m);

// Angle x(tau; g) of the frictionless pendulum, integrated from 0 to tau
// with classical fixed-step RK4 (final partial step shortened to land on tau).
double pendulum_angle(double gravity, double tau, const PendulumConfig& config);

// Angles at several times from a single ascending-time integration.
// Agrees with per-time pendulum_angle to better than 1e-10. `taus` need not
// be sorted; results are returned in input order.
std::vector<double> pendulum_angles(double gravity, std::span<const double> taus,
                                    const PendulumConfig& config);

// Small-amplitude analytic solution x0 * cos(tau * sqrt(g/l)).
// Requires initial_velocity == 0.
double linear_pendulum_angle(double gravity, double tau,
                             const PendulumConfig& config);

// First `count` times at which the trajectory crosses zero, by sign-change
// scan plus bisection. Used to generate a synthetic measurement schedule.
std::vector<double> zero_crossing_times(double gravity, std::size_t count,
                                        const PendulumConfig& config);

// For v0 = 0 the pendulum angle depends on g only through the rescaled time
// s = tau * sqrt(g / l): x(tau; g) = X(s) where X solves X'' = -sin(X),
// X(0) = x0, X'(0) = 0. This table holds X on a fine grid with cubic Hermite
// interpolation, turning a likelihood evaluation into an O(1) lookup.
class ScaledPendulumSolution {
public:
    ScaledPendulumSolution(const PendulumConfig& config, double max_scaled_time);
    double angle_at(double scaled_time) const;
    double angle(double gravity, double tau) const;

private:
    double length_;
    double step_;
    std::vector<double> angle_;     // X on the grid
    std::vector<double> velocity_;  // X' on the grid (Hermite slopes)
};

// ---------------------------------------------------------------------------
// Priors and noise
// ---------------------------------------------------------------------------

struct TruncatedNormalPrior {
    double mean = 10.0;
    double std = 1.0;
    double lower = 0.0;
    double upper = 20.0;

    void validate() const;
};

// Rejection sampling from N(mean, std^2) restricted to [lower, upper].
double sample_prior(const TruncatedNormalPrior& prior, RngStream& rng);

// Unnormalized log-density: -(g - mean)^2 / (2 std^2) inside the support,
// -inf outside.
double prior_log_density(const TruncatedNormalPrior& prior, double g);

struct GaussianNoise {
    double variance = 0.0025;  // squared observation units

    void validate() const;
};

// Unnormalized Gaussian log-likelihood -(y - prediction)^2 / (2 sigma^2).
double gaussian_log_likelihood(double y, double prediction,
                               const GaussianNoise& noise);

// Monte Carlo estimate of the angle-noise variance induced by time-measurement
// noise: each replicate perturbs every scheduled time by a
// N(time_noise_mean, time_noise_std^2) draw and pools the squared differences
// between the perturbed-time and nominal-time angles.
double calibrate_noise_variance(const PendulumConfig& config, double g_nominal,
                                std::span<const double> schedule, int n_mc,
                                RngStream& rng, double time_noise_mean = 0.45,
                                double time_noise_std = 0.1);

// ---------------------------------------------------------------------------
// Conjugate-Gaussian analytic oracle
// ---------------------------------------------------------------------------

// Estimating the mean of N(m, 1) data under an N(0, 1) prior. After t
// observations with running sum S_t the posterior is analytic.
struct GaussianMeanModel {
    double true_mean = 0.0;
    double running_sum = 0.0;  // S_t
    int count = 0;             // t
};

// Posterior N(S_t / (t+1), 1 / (t+1)) as (mean, variance).
std::pair<double, double> conjugate_posterior(const GaussianMeanModel& model);

// Second-moment ratio rho_t = (t+1)/sqrt(2t+1) * exp(S_t^2 / ((2t+1)(t+1))).
double rho_t(const GaussianMeanModel& model);

// ---------------------------------------------------------------------------
// ForwardModel: what the filters need from a model
// ---------------------------------------------------------------------------

class ForwardModel {
public:
    virtual ~ForwardModel() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::size_t observation_count() const = 0;
    virtual ParameterPoint sample_prior_point(RngStream& rng) const = 0;
    virtual double prior_log_density_at(const ParameterPoint& x) const = 0;
    // log L_s(y_s | x) for every observation index in `obs`.
    virtual std::vector<double> log_likelihoods(
        const ParameterPoint& x, std::span<const std::size_t> obs) const = 0;

    double log_likelihood(const ParameterPoint& x, std::size_t obs_index) const;
    // Unnormalized posterior log-density given the observations in `obs`.
    double joint_log_density(const ParameterPoint& x,
                             std::span<const std::size_t> obs) const;
};

class PendulumModel : public ForwardModel {
public:
    PendulumModel(PendulumConfig config, TruncatedNormalPrior prior,
                  GaussianNoise noise, std::vector<double> observation_times,
                  std::vector<double> observed_angles);

    std::size_t dimension() const override { return 1; }
    std::size_t observation_count() const override { return times_.size(); }
    ParameterPoint sample_prior_point(RngStream& rng) const override;
    double prior_log_density_at(const ParameterPoint& x) const override;
    std::vector<double> log_likelihoods(
        const ParameterPoint& x, std::span<const std::size_t> obs) const override;

    const PendulumConfig& config() const { return config_; }
    const TruncatedNormalPrior& prior() const { return prior_; }
    const GaussianNoise& noise() const { return noise_; }
    const std::vector<double>& observation_times() const { return times_; }

private:
    PendulumConfig config_;
    TruncatedNormalPrior prior_;
    GaussianNoise noise_;
    std::vector<double> times_;
    std::vector<double> angles_;
    std::unique_ptr<ScaledPendulumSolution> scaled_;  // fast path, v0 == 0 only
};

class GaussianMeanForwardModel : public ForwardModel {
public:
    explicit GaussianMeanForwardModel(std::vector<double> observations);

    static std::vector<double> synthesize(double true_mean, std::size_t count,
                                          RngStream& rng);

    std::size_t dimension() const override { return 1; }
    std::size_t observation_count() const override { return observations_.size(); }
    ParameterPoint sample_prior_point(RngStream& rng) const override;
    double prior_log_density_at(const ParameterPoint& x) const override;
    std::vector<double> log_likelihoods(
        const ParameterPoint& x, std::span<const std::size_t> obs) const override;

    const std::vector<double>& observations() const { return observations_; }

private:
    std::vector<double> observations_;
};

}  // namespace sequifilt

#endif
