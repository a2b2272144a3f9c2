#ifndef SEQUIFILT_KERNELS_HPP
#define SEQUIFILT_KERNELS_HPP

#include <functional>
#include <utility>
#include <vector>

#include "sequifilt/particle.hpp"
#include "sequifilt/rng.hpp"

namespace sequifilt {

// Random-Walk-Metropolis kernel with an isotropic Gaussian proposal and a
// prescribed (unnormalized) stationary log-density.
struct RwmKernel {
    std::function<double(const ParameterPoint&)> target_log_density;
    double proposal_std = 0.25;
};

struct RwmResult {
    ParameterPoint state;
    double log_density;  // target log-density at state
    bool accepted;
};

// One Metropolis step from x with known target log-density. The accept test
// compares log(U) against the log-density difference, so the accept/reject
// sequence is invariant under additive shifts of the target.
RwmResult rwm_step_cached(const RwmKernel& kernel, const ParameterPoint& x,
                          double log_density_x, RngStream& rng);

// One step, evaluating the target at x first. Throws NumericalError if the
// starting point has zero target density.
std::pair<ParameterPoint, bool> rwm_step(const RwmKernel& kernel,
                                         const ParameterPoint& x, RngStream& rng);

// n sequential steps; returns the final state.
ParameterPoint apply_n(const RwmKernel& kernel, const ParameterPoint& x, int n,
                       RngStream& rng);

// Runs n_samples steps from x_init and returns the last n_samples - burn_in
// states in chain order.
std::vector<ParameterPoint> mcmc_reference_run(const RwmKernel& kernel,
                                               const ParameterPoint& x_init,
                                               int n_samples, int burn_in,
                                               RngStream& rng);

}  // namespace sequifilt

#endif
