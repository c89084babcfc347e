#pragma once

#include "realonly/types.hpp"

#include <string>

namespace realonly {

// Which denoiser stands behind the residual. `External` reads residuals
// precomputed by any denoising network, stored as 8-bit PNGs named
// `<image-stem>.png` with signed values mapped by (v+1)/2.
struct ExtractorSpec {
    enum class Kind { Gaussian, Median, Wavelet, External };

    Kind kind = Kind::Gaussian;
    double sigma = 1.0;        // gaussian
    int window = 3;            // median, odd >= 3
    int levels = 2;            // wavelet, 1..5
    double threshold = 0.02;   // wavelet soft threshold
    std::string dir;           // external residual directory

    void validate() const;
    std::string id() const;
    static ExtractorSpec parse(const std::string& text);
};

Raster gaussian_denoise(const Raster& raster, double sigma);
Raster median_denoise(const Raster& raster, int window);
Raster wavelet_denoise(const Raster& raster, int levels, double threshold);

// residual = raster - denoised(raster); for Kind::External the stored file is
// returned verbatim after remapping to signed values. `source_path` supplies
// the stem for the external lookup.
Residual extract_residual(const Raster& raster, const ExtractorSpec& spec,
                          const std::string& source_path = "");

}  // namespace realonly
