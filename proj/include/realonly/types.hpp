#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace realonly {

// Single image plane, rows = y (height), cols = x (width).
using Plane = Eigen::ArrayXXd;

// Decoded image: 1 (gray) or 3 (RGB) planes of values in [0,1].
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<Plane> planes;

    int channels() const { return static_cast<int>(planes.size()); }
    bool valid() const;
    void clamp01();
};

// Signed, unclamped noise pattern with the shape of its source raster.
struct Residual {
    int width = 0;
    int height = 0;
    std::vector<Plane> planes;

    int channels() const { return static_cast<int>(planes.size()); }
};

// DFT amplitude plane, indexed amp(u,v): u conjugate to x (size M = source
// width), v conjugate to y (size N = source height). DC at (0,0), unshifted.
struct Spectrum {
    Eigen::ArrayXXd amp;  // rows = M, cols = N

    Eigen::Index M() const { return amp.rows(); }
    Eigen::Index N() const { return amp.cols(); }
};

// Grid-sampled enhanced spectrum, flattened row-major over (m,n).
struct FeatureVector {
    Eigen::VectorXd values;
    int grid_rows = 0;
    int grid_cols = 0;
    int k = 0;
    std::string extractor;
    bool enhanced = false;
};

}  // namespace realonly
