#pragma once

#include "realonly/types.hpp"

#include <cstdint>
#include <string>

namespace realonly {

// Desk-scale stand-in for generator upsampling artifacts: box-downsample a
// real photo by `factor`, upsample back with the given method, then pass the
// result through a seeded conv + activation + tone-curve output stage like
// the one every generator network ends with. The nonlinearities are what turn
// the upsampler's frequency lattice into visible spectral peaks.
struct SimSpec {
    enum class Method { Nearest, Bilinear, TransposedConv };

    Method method = Method::Nearest;
    int factor = 4;  // 2, 4 or 8; must divide both dimensions
    std::uint64_t seed = 0;

    void validate() const;
    std::string method_name() const;
    static SimSpec parse(const std::string& method, int factor, std::uint64_t seed);
};

Raster simulate(const Raster& real, const SimSpec& spec);

struct PeakReport {
    double ratio = 0.0;   // mean amplitude at predicted peaks / median off-peak
    bool pass = false;    // ratio >= 5
    int expected_period = 0;
};

// Checks a spectrum for peaks on the 2-D frequency lattice (a*P, b*P) implied
// by an upsampling period P. Each lattice bin is scored by the mean of the
// upper half (5 of 9) of its 3x3 wrap-around window; the ratio compares the
// mean of those window scores (DC excluded) against the median amplitude of
// all bins outside every window. A clean comb with zero off-peak energy
// reports a capped sentinel ratio.
PeakReport peak_report(const Spectrum& spec, int expected_period);

inline constexpr double kPeakRatioCap = 1e9;

}  // namespace realonly
