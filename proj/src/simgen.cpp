#include "realonly/simgen.hpp"

#include "realonly/imagio.hpp"
#include "realonly/rng.hpp"
#include "realonly/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace realonly {

namespace {

Plane box_downsample(const Plane& p, int factor) {
    const int h = static_cast<int>(p.rows()) / factor;
    const int w = static_cast<int>(p.cols()) / factor;
    Plane out(h, w);
    const double inv = 1.0 / (factor * factor);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out(y, x) = p.block(y * factor, x * factor, factor, factor).sum() * inv;
    return out;
}

// Stride-2 transposed convolution with a 4x4 kernel; the 2-pixel overhang is
// trimmed symmetrically so output is exactly 2x the input.
Plane transposed_conv2(const Plane& p, const Eigen::Matrix4d& kernel) {
    const int h = static_cast<int>(p.rows());
    const int w = static_cast<int>(p.cols());
    Plane padded = Plane::Zero(2 * h + 2, 2 * w + 2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ky = 0; ky < 4; ++ky)
                for (int kx = 0; kx < 4; ++kx)
                    padded(2 * y + ky, 2 * x + kx) += p(y, x) * kernel(ky, kx);
    return padded.block(1, 1, 2 * h, 2 * w);
}

Eigen::Matrix4d random_kernel(std::uint64_t seed) {
    CounterRng rng(seed, 0xDECA);
    Eigen::Matrix4d k;
    double sum = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double v = rng.uniform(static_cast<std::uint64_t>(i)) + 0.05;
        k(i / 4, i % 4) = v;
        sum += v;
    }
    return k / sum;
}

Plane conv3(const Plane& p, const Eigen::Matrix3d& k) {
    const int h = static_cast<int>(p.rows());
    const int w = static_cast<int>(p.cols());
    Plane out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    acc += k(dy + 1, dx + 1) *
                           p(std::clamp(y + dy, 0, h - 1), std::clamp(x + dx, 0, w - 1));
            out(y, x) = acc;
        }
    return out;
}

// Generator output stage: seeded 3x3 convolution (sum 1), an s-curve
// activation, and an asymmetric tone curve. A bare interpolating upsampler
// cancels its own spectral replicas (the kernel phases sum to one), so the
// lattice artifact only becomes observable through the conv+activation stages
// every generator ends with. The odd s-curve rectifies the lattice-modulated
// signal into combs along each axis; the even curvature of the tone curve
// multiplies the horizontal and vertical combs together, which is what puts
// energy on the interior of the 2-D peak lattice.
void output_stage(Raster& img, std::uint64_t seed) {
    CounterRng rng(seed, 0x6E);
    Eigen::Matrix3d k;
    double sum = 0.0;
    for (int i = 0; i < 9; ++i) {
        k(i / 3, i % 3) = rng.uniform(static_cast<std::uint64_t>(i));
        sum += k(i / 3, i % 3);
    }
    k /= sum;
    const double gain = 3.0;
    const double norm = std::tanh(gain * 0.5);
    for (Plane& p : img.planes) {
        p = conv3(p, k);
        p = 0.5 + 0.5 * (gain * (p - 0.5)).tanh() / norm;
        p = p.max(0.0).pow(3.0);
    }
    img.clamp01();
}

}  // namespace

void SimSpec::validate() const {
    if (factor != 1 && factor != 2 && factor != 4 && factor != 8)
        throw std::invalid_argument("sim factor must be 1, 2, 4 or 8");
}

std::string SimSpec::method_name() const {
    switch (method) {
        case Method::Nearest: return "nearest";
        case Method::Bilinear: return "bilinear";
        case Method::TransposedConv: return "transposed_conv";
    }
    return "?";
}

SimSpec SimSpec::parse(const std::string& method, int factor, std::uint64_t seed) {
    SimSpec s;
    if (method == "nearest") s.method = Method::Nearest;
    else if (method == "bilinear") s.method = Method::Bilinear;
    else if (method == "transposed_conv") s.method = Method::TransposedConv;
    else throw std::invalid_argument("unknown simulation method: " + method);
    s.factor = factor;
    s.seed = seed;
    s.validate();
    return s;
}

Raster simulate(const Raster& real, const SimSpec& spec) {
    spec.validate();
    if (spec.factor == 1) return real;
    if (real.width % spec.factor != 0 || real.height % spec.factor != 0)
        throw std::invalid_argument("simulate: factor must divide image dimensions");

    Raster out = real;
    const int w = real.width, h = real.height;
    for (Plane& p : out.planes) {
        Plane low = box_downsample(p, spec.factor);
        switch (spec.method) {
            case SimSpec::Method::Nearest:
                p = resize_plane(low, w, h, ResizeMethod::Nearest);
                break;
            case SimSpec::Method::Bilinear:
                p = resize_plane(low, w, h, ResizeMethod::Bilinear);
                break;
            case SimSpec::Method::TransposedConv: {
                const Eigen::Matrix4d kernel = random_kernel(spec.seed);
                const int steps = static_cast<int>(std::ceil(std::log2(spec.factor)));
                Plane up = low;
                for (int s = 0; s < steps; ++s) up = transposed_conv2(up, kernel);
                p = up;
                break;
            }
        }
    }
    output_stage(out, spec.seed);
    return out;
}

PeakReport peak_report(const Spectrum& spec, int expected_period) {
    const int M = static_cast<int>(spec.M());
    const int N = static_cast<int>(spec.N());
    if (expected_period < 2 || M % expected_period != 0 || N % expected_period != 0)
        throw std::invalid_argument("peak_report: period must be >= 2 and divide both dimensions");

    // Peaks live on the 2-D frequency lattice (a*P, b*P). Each lattice bin is
    // scored over its 3x3 wrap-around window by the mean of the upper half
    // (5 of 9) of the window's amplitudes: peak energy may sit in one bin or
    // leak into a few neighbours, and averaging all nine would dilute a sharp
    // peak by the floor. Every window (including the one around DC) is
    // excluded from the off-peak noise-floor estimate.
    std::vector<char> masked(static_cast<std::size_t>(M) * N, 0);
    const int nu = M / expected_period, nv = N / expected_period;
    std::vector<double> peaks;
    for (int a = 0; a < nu; ++a)
        for (int b = 0; b < nv; ++b) {
            std::array<double, 9> win;
            int w = 0;
            for (int du = -1; du <= 1; ++du)
                for (int dv = -1; dv <= 1; ++dv) {
                    const int u = (a * expected_period + du + M) % M;
                    const int v = (b * expected_period + dv + N) % N;
                    win[static_cast<std::size_t>(w++)] = spec.amp(u, v);
                    masked[static_cast<std::size_t>(u) * N + v] = 1;
                }
            if (a != 0 || b != 0) {
                std::sort(win.begin(), win.end(), std::greater<>());
                double top = 0.0;
                for (int i = 0; i < 5; ++i) top += win[static_cast<std::size_t>(i)];
                peaks.push_back(top / 5.0);
            }
        }

    std::vector<double> off;
    off.reserve(static_cast<std::size_t>(M) * N);
    for (int u = 0; u < M; ++u)
        for (int v = 0; v < N; ++v)
            if (!masked[static_cast<std::size_t>(u) * N + v]) off.push_back(spec.amp(u, v));

    PeakReport rep;
    rep.expected_period = expected_period;
    if (peaks.empty() || off.empty()) throw std::invalid_argument("peak_report: degenerate grid");

    auto mid = off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2);
    std::nth_element(off.begin(), mid, off.end());
    const double median_off = *mid;
    double mean_peak = 0.0;
    for (double p : peaks) mean_peak += p;
    mean_peak /= static_cast<double>(peaks.size());
    rep.ratio = median_off > 0 ? std::min(mean_peak / median_off, kPeakRatioCap) : kPeakRatioCap;
    if (mean_peak <= 0.0 && median_off <= 0.0) rep.ratio = 1.0;
    rep.pass = rep.ratio >= 5.0;
    return rep;
}

}  // namespace realonly
