#include "realonly/spectrum.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <stdexcept>
#include <vector>

namespace realonly {

Spectrum dft2_amplitude(const Plane& plane) {
    if (plane.rows() < 1 || plane.cols() < 1)
        throw std::invalid_argument("dft2_amplitude: empty plane");
    if (!plane.isFinite().all())
        throw std::invalid_argument("dft2_amplitude: non-finite input samples");

    const int N = static_cast<int>(plane.rows());  // y extent
    const int M = static_cast<int>(plane.cols());  // x extent
    Eigen::FFT<double> fft;

    // Transform along x per row, then along y per u-column.
    Eigen::MatrixXcd stage(N, M);
    {
        std::vector<std::complex<double>> in(M), out(M);
        for (int y = 0; y < N; ++y) {
            for (int x = 0; x < M; ++x) in[x] = plane(y, x);
            fft.fwd(out, in);
            for (int u = 0; u < M; ++u) stage(y, u) = out[u];
        }
    }
    Spectrum spec;
    spec.amp.resize(M, N);
    {
        std::vector<std::complex<double>> in(N), out(N);
        const double norm = 1.0 / (static_cast<double>(M) * N);
        for (int u = 0; u < M; ++u) {
            for (int y = 0; y < N; ++y) in[y] = stage(y, u);
            fft.fwd(out, in);
            for (int v = 0; v < N; ++v) spec.amp(u, v) = std::abs(out[v]) * norm;
        }
    }
    return spec;
}

Eigen::VectorXd row_profile(const Spectrum& spec) {
    return spec.amp.rowwise().sum().matrix();
}

Eigen::VectorXd mean_profile(const std::vector<Spectrum>& specs) {
    if (specs.empty()) throw std::invalid_argument("mean_profile: empty input");
    const Eigen::Index M = specs.front().M();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(M);
    for (const Spectrum& s : specs) {
        if (s.M() != M) throw std::invalid_argument("mean_profile: mismatched spectrum sizes");
        acc += row_profile(s);
    }
    return acc / static_cast<double>(specs.size());
}

Spectrum enhance(const Spectrum& spec) {
    Spectrum out;
    out.amp.resize(spec.M(), spec.N());
    for (Eigen::Index u = 0; u < spec.M(); ++u) {
        const double mean = spec.amp.row(u).mean();
        for (Eigen::Index v = 0; v < spec.N(); ++v) {
            const double a = spec.amp(u, v);
            out.amp(u, v) = a < mean ? 0.0 : a * a;
        }
    }
    return out;
}

FeatureVector sample_features(const Spectrum& spec, int k) {
    const Eigen::Index M = spec.M(), N = spec.N();
    if (k < 1 || k > std::min(M, N)) throw std::invalid_argument("sample_features: k out of range");
    FeatureVector f;
    f.k = k;
    f.grid_rows = static_cast<int>((M - 1) / k) + 1;
    f.grid_cols = static_cast<int>((N - 1) / k) + 1;
    f.values.resize(static_cast<Eigen::Index>(f.grid_rows) * f.grid_cols);
    Eigen::Index i = 0;
    for (int m = 0; m < f.grid_rows; ++m)
        for (int n = 0; n < f.grid_cols; ++n)
            f.values(i++) = spec.amp(static_cast<Eigen::Index>(m) * k, static_cast<Eigen::Index>(n) * k);
    return f;
}

Spectrum merge_channels(const Residual& residual) {
    const int channels = residual.channels();
    if (channels < 1 || channels > 3)
        throw std::invalid_argument("merge_channels: unsupported channel count");
    Spectrum acc = dft2_amplitude(residual.planes[0]);
    for (int c = 1; c < channels; ++c) acc.amp += dft2_amplitude(residual.planes[c]).amp;
    acc.amp /= static_cast<double>(channels);
    return acc;
}

Raster spectrum_to_image(const Spectrum& spec, bool shift, bool log_scale) {
    const Eigen::Index M = spec.M(), N = spec.N();
    // Render with u horizontal to match the source image orientation.
    Plane img(N, M);
    for (Eigen::Index u = 0; u < M; ++u)
        for (Eigen::Index v = 0; v < N; ++v) {
            Eigen::Index du = shift ? (u + M / 2) % M : u;
            Eigen::Index dv = shift ? (v + N / 2) % N : v;
            img(dv, du) = spec.amp(u, v);
        }
    if (log_scale) img = (1.0 + img).log();

    const double lo = img.minCoeff();
    const double hi = img.maxCoeff();
    if (hi - lo < 1e-300) {
        img.setConstant(0.5);
    } else {
        img = (img - lo) / (hi - lo);
    }
    Raster out;
    out.width = static_cast<int>(M);
    out.height = static_cast<int>(N);
    out.planes = {img};
    return out;
}

}  // namespace realonly
