#pragma once

#include "realonly/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace realonly {

// Seeded post-processing operation. Parameter ranges are validated against
// the protocol this suite reproduces (see validate()).
struct PerturbSpec {
    enum class Kind {
        Blur,        // gaussian, kernel size 3, sigma in [0.1, 1]
        Brightness,  // factor in [0.3, 3]
        Gamma,       // gamma in [0.3, 3]
        Crop,        // center crop, size in [96, 256]
        Jpeg,        // quality in [70, 100]
        GaussNoise,  // sigma in [1, 10] 8-bit units, applied as sigma/255
        SaltPepper,  // density in [0.001, 0.01], pepper:salt = 1:1
        Speckle,     // sigma in [0.01, 0.1]
        Poisson      // lambda in [0.1, 1]
    };

    Kind kind = Kind::Jpeg;
    double param = 90.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::string to_string() const;

    // "jpeg:85", "gauss:5@seed=7", "crop:128", ...
    static PerturbSpec parse(const std::string& text);
};

Raster apply(const Raster& raster, const PerturbSpec& spec);

struct PsnrRangeReport {
    PerturbSpec::Kind kind;
    double min_psnr = 0.0;
    double max_psnr = 0.0;
    double expected_lo = 0.0;
    double expected_hi = 0.0;
    bool overlaps = false;
};

// Sweeps a stochastic kind over a parameter grid on a fixed synthetic test
// set and checks the observed PSNR range against the documented interval.
PsnrRangeReport psnr_range_check(PerturbSpec::Kind kind, const std::vector<double>& param_grid,
                                 const std::vector<Raster>& test_set, std::uint64_t seed = 1);

}  // namespace realonly
