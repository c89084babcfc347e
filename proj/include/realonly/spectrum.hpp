#pragma once

#include "realonly/types.hpp"

#include <vector>

namespace realonly {

// Amplitude of the 1/(MN)-normalized 2-D DFT of one residual channel.
// Input plane is indexed (y,x); the result is indexed (u,v) with u conjugate
// to x. DC stays at (0,0).
Spectrum dft2_amplitude(const Plane& plane);

// profile[u] = sum_v amp(u,v)
Eigen::VectorXd row_profile(const Spectrum& spec);

// Elementwise mean of row profiles across a subset of images.
Eigen::VectorXd mean_profile(const std::vector<Spectrum>& specs);

// Zeroes amplitudes strictly below their row mean, squares the rest.
Spectrum enhance(const Spectrum& spec);

// F(m,n) = amp(m*k, n*k), row-major over (m,n).
FeatureVector sample_features(const Spectrum& spec, int k);

// Per-channel amplitude spectra averaged into one plane (identity for one
// channel).
Spectrum merge_channels(const Residual& residual);

// Grayscale rendering: optional fftshift, optional log1p, min-max normalized.
// All-equal spectra render as uniform 0.5.
Raster spectrum_to_image(const Spectrum& spec, bool shift, bool log_scale);

}  // namespace realonly
