#pragma once

#include <cmath>
#include <cstdint>

namespace realonly {

// Counter-based generator: every draw is a pure function of (seed, stream,
// counter), so any pixel's noise can be computed independently of order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(mix(seed ^ mix(stream))) {}

    std::uint64_t bits(std::uint64_t counter) const { return mix(seed_ + counter * GOLDEN); }

    double uniform(std::uint64_t counter) const {
        return (bits(counter) >> 11) * 0x1.0p-53;  // [0,1)
    }

    // Box-Muller on two decorrelated uniforms from one counter.
    double gaussian(std::uint64_t counter) const {
        double u1 = (bits(counter * 2) >> 11) * 0x1.0p-53;
        double u2 = (bits(counter * 2 + 1) >> 11) * 0x1.0p-53;
        u1 = u1 > 0 ? u1 : 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Knuth multiplication for small means, normal approximation above.
    double poisson(std::uint64_t counter, double mean) const {
        if (mean <= 0) return 0.0;
        if (mean > 60.0) {
            double v = mean + std::sqrt(mean) * gaussian(counter);
            return std::max(0.0, std::round(v));
        }
        const double limit = std::exp(-mean);
        double prod = 1.0;
        std::uint64_t n = 0;
        std::uint64_t sub = 0;
        do {
            prod *= uniform(counter * 256 + sub++);
            ++n;
        } while (prod > limit && sub < 255);
        return static_cast<double>(n - 1);
    }

private:
    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
        z += GOLDEN;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace realonly
