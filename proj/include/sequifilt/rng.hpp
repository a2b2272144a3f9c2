#ifndef SEQUIFILT_RNG_HPP
#define SEQUIFILT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace sequifilt {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += UINT64_C(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

// Fixed stream labels so substreams derived from the same seed never collide.
enum class StreamId : std::uint64_t {
    Init = 1,       // prior sampling in monte_carlo
    Resample = 2,   // inverse-CDF resampling, one stream per filter step
    Move = 3,       // MCMC rejuvenation, one stream per (step, particle)
    Chain = 4,      // standalone MCMC reference run
    Calibrate = 5,  // noise calibration replicates
    Study = 6,      // derived per-repetition seeds in parameter studies
    Data = 7,       // synthetic observation generation
};

// A seedable random stream. Substreams are derived by hashing a
// (seed, label, indices...) path with splitmix64, so any particle or
// repetition gets the same draws regardless of thread count or
// evaluation order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(splitmix64_next(seed)) {}

    static RngStream derive(std::uint64_t seed, StreamId id,
                            std::initializer_list<std::uint64_t> path = {}) {
        std::uint64_t state = seed;
        splitmix64_next(state);
        state ^= static_cast<std::uint64_t>(id) * UINT64_C(0xD6E8FEB86659FD93);
        splitmix64_next(state);
        for (std::uint64_t p : path) {
            state ^= p * UINT64_C(0xA3EC647659359ACD);
            splitmix64_next(state);
        }
        return RngStream(splitmix64_next(state));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1], for safe use under log().
    double uniform_positive() { return 1.0 - uniform(); }

    // Box-Muller without caching: every call consumes exactly two uniforms.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform_positive();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sequifilt

#endif
