#ifndef SEQUIFILT_ERRORS_HPP
#define SEQUIFILT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sequifilt {

// Invalid configuration, input file, or precondition violation (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: likelihood collapse, ODE divergence, degenerate sample
// (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sequifilt

#endif
