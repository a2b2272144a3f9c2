#ifndef SEQUIFILT_LOGSUMEXP_HPP
#define SEQUIFILT_LOGSUMEXP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace sequifilt {

// log(sum_i exp(args[i])), stable under large negative arguments.
// Returns -inf for an all -inf input.
inline double log_sum_exp(std::span<const double> args) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    double max_arg = neg_inf;
    for (double a : args) max_arg = std::max(max_arg, a);
    if (max_arg == neg_inf) return neg_inf;
    double sum = 0.0;
    for (double a : args) sum += std::exp(a - max_arg);
    return max_arg + std::log(sum);
}

}  // namespace sequifilt

#endif
