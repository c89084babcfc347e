#include "realonly/noise.hpp"

#include "realonly/imagio.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace realonly {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable convolution with edge replication.
Plane convolve_separable(const Plane& p, const std::vector<double>& k) {
    const int radius = static_cast<int>(k.size() / 2);
    const int h = static_cast<int>(p.rows());
    const int w = static_cast<int>(p.cols());
    Plane tmp(h, w), out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * p(y, std::clamp(x + i, 0, w - 1));
            tmp(y, x) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp(std::clamp(y + i, 0, h - 1), x);
            out(y, x) = acc;
        }
    return out;
}

Plane median_plane(const Plane& p, int window) {
    const int radius = window / 2;
    const int h = static_cast<int>(p.rows());
    const int w = static_cast<int>(p.cols());
    Plane out(h, w);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(window) * window);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            vals.clear();
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx)
                    vals.push_back(p(std::clamp(y + dy, 0, h - 1), std::clamp(x + dx, 0, w - 1)));
            auto mid = vals.begin() + vals.size() / 2;
            std::nth_element(vals.begin(), mid, vals.end());
            out(y, x) = *mid;
        }
    return out;
}

// Single-level 2-D Haar step on the top-left size x size region, in place:
// approximations to the upper-left quadrant, details to the other three.
void haar_forward(Plane& p, int size) {
    const int half = size / 2;
    const double s = 1.0 / std::sqrt(2.0);
    Plane tmp = p.topLeftCorner(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < half; ++x) {
            p(y, x) = s * (tmp(y, 2 * x) + tmp(y, 2 * x + 1));
            p(y, x + half) = s * (tmp(y, 2 * x) - tmp(y, 2 * x + 1));
        }
    tmp = p.topLeftCorner(size, size);
    for (int y = 0; y < half; ++y)
        for (int x = 0; x < size; ++x) {
            p(y, x) = s * (tmp(2 * y, x) + tmp(2 * y + 1, x));
            p(y + half, x) = s * (tmp(2 * y, x) - tmp(2 * y + 1, x));
        }
}

void haar_inverse(Plane& p, int size) {
    const int half = size / 2;
    const double s = 1.0 / std::sqrt(2.0);
    Plane tmp = p.topLeftCorner(size, size);
    for (int y = 0; y < half; ++y)
        for (int x = 0; x < size; ++x) {
            p(2 * y, x) = s * (tmp(y, x) + tmp(y + half, x));
            p(2 * y + 1, x) = s * (tmp(y, x) - tmp(y + half, x));
        }
    tmp = p.topLeftCorner(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < half; ++x) {
            p(y, 2 * x) = s * (tmp(y, x) + tmp(y, x + half));
            p(y, 2 * x + 1) = s * (tmp(y, x) - tmp(y, x + half));
        }
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

// Reflect-pads to a multiple of 2^levels (square working area), transforms,
// thresholds details, reconstructs and crops.
Plane wavelet_plane(const Plane& p, int levels, double threshold) {
    const int h = static_cast<int>(p.rows());
    const int w = static_cast<int>(p.cols());
    const int mult = 1 << levels;
    auto round_up = [mult](int n) { return ((n + mult - 1) / mult) * mult; };
    const int size = std::max(round_up(h), round_up(w));

    Plane work(size, size);
    for (int y = 0; y < size; ++y) {
        int sy = y < h ? y : 2 * h - 2 - y;
        sy = std::clamp(sy, 0, h - 1);
        for (int x = 0; x < size; ++x) {
            int sx = x < w ? x : 2 * w - 2 - x;
            sx = std::clamp(sx, 0, w - 1);
            work(y, x) = p(sy, sx);
        }
    }

    for (int lv = 0, s = size; lv < levels; ++lv, s /= 2) haar_forward(work, s);

    const int approx = size >> levels;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (y >= approx || x >= approx) work(y, x) = soft_threshold(work(y, x), threshold);

    for (int lv = levels - 1; lv >= 0; --lv) haar_inverse(work, size >> lv);
    return work.topLeftCorner(h, w);
}

}  // namespace

void ExtractorSpec::validate() const {
    switch (kind) {
        case Kind::Gaussian:
            if (!(sigma > 0)) throw std::invalid_argument("gaussian extractor: sigma must be > 0");
            break;
        case Kind::Median:
            if (window < 3 || window % 2 == 0)
                throw std::invalid_argument("median extractor: window must be odd >= 3");
            break;
        case Kind::Wavelet:
            if (levels < 1 || levels > 5)
                throw std::invalid_argument("wavelet extractor: levels must be in 1..5");
            if (threshold < 0) throw std::invalid_argument("wavelet extractor: threshold must be >= 0");
            break;
        case Kind::External:
            if (dir.empty()) throw std::invalid_argument("external extractor: directory required");
            break;
    }
}

std::string ExtractorSpec::id() const {
    switch (kind) {
        case Kind::Gaussian: return "gaussian:" + std::to_string(sigma);
        case Kind::Median: return "median:" + std::to_string(window);
        case Kind::Wavelet:
            return "wavelet:" + std::to_string(levels) + "," + std::to_string(threshold);
        case Kind::External: return "external:" + dir;
    }
    return "?";
}

ExtractorSpec ExtractorSpec::parse(const std::string& text) {
    ExtractorSpec spec;
    std::string name = text, arg;
    if (auto pos = text.find(':'); pos != std::string::npos) {
        name = text.substr(0, pos);
        arg = text.substr(pos + 1);
    }
    if (name == "gaussian") {
        spec.kind = Kind::Gaussian;
        if (!arg.empty()) spec.sigma = std::stod(arg);
    } else if (name == "median") {
        spec.kind = Kind::Median;
        if (!arg.empty()) spec.window = std::stoi(arg);
    } else if (name == "wavelet") {
        spec.kind = Kind::Wavelet;
        if (!arg.empty()) {
            auto comma = arg.find(',');
            spec.levels = std::stoi(arg.substr(0, comma));
            if (comma != std::string::npos) spec.threshold = std::stod(arg.substr(comma + 1));
        }
    } else if (name == "external") {
        spec.kind = Kind::External;
        spec.dir = arg;
    } else {
        throw std::invalid_argument("unknown extractor: " + text);
    }
    spec.validate();
    return spec;
}

Raster gaussian_denoise(const Raster& raster, double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("gaussian_denoise: sigma must be > 0");
    Raster out = raster;
    const std::vector<double> k = gaussian_kernel(sigma);
    for (Plane& p : out.planes) p = convolve_separable(p, k);
    return out;
}

Raster median_denoise(const Raster& raster, int window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("median_denoise: window must be odd >= 3");
    Raster out = raster;
    for (Plane& p : out.planes) p = median_plane(p, window);
    return out;
}

Raster wavelet_denoise(const Raster& raster, int levels, double threshold) {
    if (levels < 1 || levels > 5) throw std::invalid_argument("wavelet_denoise: levels out of range");
    Raster out = raster;
    for (Plane& p : out.planes) p = wavelet_plane(p, levels, threshold);
    return out;
}

Residual extract_residual(const Raster& raster, const ExtractorSpec& spec,
                          const std::string& source_path) {
    spec.validate();
    if (spec.kind == ExtractorSpec::Kind::External) {
        std::filesystem::path stem = std::filesystem::path(source_path).stem();
        if (stem.empty()) throw std::invalid_argument("external residual: source path required");
        std::filesystem::path file = std::filesystem::path(spec.dir) / (stem.string() + ".png");
        if (!std::filesystem::exists(file))
            throw std::runtime_error("external residual missing: " + file.string());
        Raster stored = load_image(file.string());
        Residual res;
        res.width = stored.width;
        res.height = stored.height;
        res.planes.reserve(stored.planes.size());
        for (const Plane& p : stored.planes) res.planes.push_back(p * 2.0 - 1.0);
        return res;
    }

    Raster denoised;
    switch (spec.kind) {
        case ExtractorSpec::Kind::Gaussian: denoised = gaussian_denoise(raster, spec.sigma); break;
        case ExtractorSpec::Kind::Median: denoised = median_denoise(raster, spec.window); break;
        case ExtractorSpec::Kind::Wavelet:
            denoised = wavelet_denoise(raster, spec.levels, spec.threshold);
            break;
        default: throw std::invalid_argument("extract_residual: bad spec");
    }
    Residual res;
    res.width = raster.width;
    res.height = raster.height;
    res.planes.reserve(raster.planes.size());
    for (std::size_t c = 0; c < raster.planes.size(); ++c)
        res.planes.push_back(raster.planes[c] - denoised.planes[c]);
    return res;
}

}  // namespace realonly
