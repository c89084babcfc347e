#pragma once

#include "realonly/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace realonly {

enum class ImageFormat { Png, Ppm, Jpeg };

// Decodes PNG, binary PPM (P6, maxval 255) or baseline JPEG. 8-bit samples
// map to [0,1] by v/255; alpha is discarded, grayscale stays single-channel.
// Throws std::runtime_error with path and cause on failure.
Raster load_image(const std::string& path);

void save_image(const Raster& raster, const std::string& path, ImageFormat format,
                int jpeg_quality = 90);

// Format picked from the file extension (.png/.ppm/.jpg/.jpeg).
void save_image(const Raster& raster, const std::string& path, int jpeg_quality = 90);

// JPEG round-trip fully in memory (used by the jpeg perturbation).
std::vector<std::uint8_t> encode_jpeg(const Raster& raster, int quality);
Raster decode_jpeg(const std::uint8_t* data, std::size_t size);

Raster center_crop(const Raster& raster, int size);

enum class ResizeMethod { Nearest, Bilinear };

// Half-pixel-center convention: src = (dst + 0.5) * scale - 0.5, edge-clamped.
Plane resize_plane(const Plane& plane, int new_w, int new_h, ResizeMethod method);
Raster resize(const Raster& raster, int new_w, int new_h, ResizeMethod method);

}  // namespace realonly
