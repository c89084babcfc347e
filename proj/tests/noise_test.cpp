#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "realonly/imagio.hpp"
#include "realonly/noise.hpp"
#include "realonly/rng.hpp"

#include <cmath>
#include <filesystem>

using namespace realonly;
namespace fs = std::filesystem;

namespace {

Raster constant_raster(double v, int size = 8, int channels = 1) {
    Raster r;
    r.width = size;
    r.height = size;
    r.planes.assign(channels, Plane::Constant(size, size, v));
    return r;
}

Raster random_raster(std::uint64_t seed, int size, int channels = 1) {
    Raster r;
    r.width = size;
    r.height = size;
    CounterRng rng(seed);
    std::uint64_t ctr = 0;
    for (int c = 0; c < channels; ++c) {
        Plane p(size, size);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) p(y, x) = rng.uniform(ctr++);
        r.planes.push_back(p);
    }
    return r;
}

}  // namespace

TEST_CASE("gaussian residual of a constant image is zero") {
    const Raster img = constant_raster(0.37);
    const Residual res = extract_residual(img, ExtractorSpec{});
    CHECK(res.planes[0].abs().maxCoeff() < 1e-9);
}

TEST_CASE("median window 3 removes an isolated impulse") {
    Raster img = constant_raster(0.0, 9);
    img.planes[0](4, 4) = 1.0;
    ExtractorSpec spec;
    spec.kind = ExtractorSpec::Kind::Median;
    spec.window = 3;
    const Residual res = extract_residual(img, spec);
    CHECK(res.planes[0](4, 4) == doctest::Approx(1.0));
    res.planes[0].unaryExpr([](double v) { return v; });
    double off_peak = 0.0;
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x)
            if (y != 4 || x != 4) off_peak = std::max(off_peak, std::abs(res.planes[0](y, x)));
    CHECK(off_peak == 0.0);
}

TEST_CASE("gaussian sigma=1 keeps at least 20% of checkerboard AC energy in the residual") {
    Raster img = constant_raster(0.0, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) img.planes[0](y, x) = ((x + y) % 2 == 0) ? 1.0 : 0.0;
    const double mean = img.planes[0].mean();
    const double ac_energy = (img.planes[0] - mean).square().sum();
    const Residual res = extract_residual(img, ExtractorSpec{});
    CHECK(res.planes[0].square().sum() >= 0.2 * ac_energy);
}

TEST_CASE("gaussian_denoise") {
    SUBCASE("constant input unchanged") {
        const Raster img = constant_raster(0.6);
        const Raster out = gaussian_denoise(img, 1.5);
        CHECK((out.planes[0] - img.planes[0]).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("mass conserved for interior-supported signal") {
        Raster img = constant_raster(0.0, 16);
        img.planes[0](8, 8) = 0.5;
        img.planes[0](7, 9) = 0.25;
        const Raster out = gaussian_denoise(img, 1.0);
        CHECK(out.planes[0].sum() == doctest::Approx(img.planes[0].sum()).epsilon(1e-9));
    }
    SUBCASE("impulse center weight matches the discrete normalized kernel") {
        Raster img = constant_raster(0.0, 16);
        img.planes[0](8, 8) = 1.0;
        const Raster out = gaussian_denoise(img, 1.0);
        // 1-D kernel radius ceil(3*1)=3, w(i)=exp(-i^2/2)
        double norm = 0.0;
        for (int i = -3; i <= 3; ++i) norm += std::exp(-0.5 * i * i);
        const double w0 = 1.0 / norm;
        CHECK(out.planes[0](8, 8) == doctest::Approx(w0 * w0).epsilon(1e-12));
    }
    SUBCASE("nonpositive sigma throws") { CHECK_THROWS(gaussian_denoise(constant_raster(0.5), 0.0)); }
}

TEST_CASE("wavelet_denoise") {
    SUBCASE("threshold 0 reconstructs exactly") {
        const Raster img = random_raster(11, 16);
        const Raster out = wavelet_denoise(img, 2, 0.0);
        CHECK((out.planes[0] - img.planes[0]).abs().maxCoeff() < 1e-9);
    }
    SUBCASE("constant image unchanged under any threshold") {
        const Raster img = constant_raster(0.42, 16);
        const Raster out = wavelet_denoise(img, 3, 0.7);
        CHECK((out.planes[0] - img.planes[0]).abs().maxCoeff() < 1e-9);
    }
    SUBCASE("non power-of-two sizes are handled by reflect padding") {
        const Raster img = random_raster(12, 10);
        const Raster out = wavelet_denoise(img, 2, 0.0);
        CHECK(out.width == 10);
        CHECK((out.planes[0] - img.planes[0]).abs().maxCoeff() < 1e-9);
    }
    SUBCASE("levels out of range throws") { CHECK_THROWS(wavelet_denoise(constant_raster(0.5), 6, 0.1)); }
}

TEST_CASE("soft threshold halves a detail coefficient of magnitude 2t") {
    // Columns differing by a produce a single detail coefficient of
    // magnitude a on a 2x2 tile; with a = 2t soft thresholding leaves t,
    // so the reconstructed column difference shrinks by exactly half.
    const double t = 0.1;
    const double a = 2.0 * t;
    Raster img = constant_raster(0.5, 2);
    img.planes[0](0, 0) = 0.5 + a / 2.0;
    img.planes[0](0, 1) = 0.5 - a / 2.0;
    img.planes[0](1, 0) = 0.5 + a / 2.0;
    img.planes[0](1, 1) = 0.5 - a / 2.0;
    const Raster out = wavelet_denoise(img, 1, t);
    const double in_diff = img.planes[0](0, 0) - img.planes[0](0, 1);
    const double out_diff = out.planes[0](0, 0) - out.planes[0](0, 1);
    CHECK(out_diff == doctest::Approx(in_diff / 2.0).epsilon(1e-9));
}

TEST_CASE("residual plus denoised reconstructs the input for built-in kinds") {
    const Raster img = random_raster(13, 16, 3);
    for (ExtractorSpec spec : {ExtractorSpec{}, [] {
                                   ExtractorSpec s;
                                   s.kind = ExtractorSpec::Kind::Median;
                                   return s;
                               }(),
                               [] {
                                   ExtractorSpec s;
                                   s.kind = ExtractorSpec::Kind::Wavelet;
                                   return s;
                               }()}) {
        const Residual res = extract_residual(img, spec);
        Raster denoised;
        switch (spec.kind) {
            case ExtractorSpec::Kind::Gaussian: denoised = gaussian_denoise(img, spec.sigma); break;
            case ExtractorSpec::Kind::Median: denoised = median_denoise(img, spec.window); break;
            default: denoised = wavelet_denoise(img, spec.levels, spec.threshold); break;
        }
        for (int c = 0; c < 3; ++c)
            CHECK((res.planes[c] + denoised.planes[c] - img.planes[c]).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("external residuals load with the signed mapping and deterministically") {
    const fs::path dir = fs::temp_directory_path() / "realonly_noise_ext";
    fs::create_directories(dir);
    Raster stored = random_raster(17, 8, 3);
    for (Plane& p : stored.planes) p = (p * 255.0).round() / 255.0;
    save_image(stored, (dir / "photo.png").string(), ImageFormat::Png);

    ExtractorSpec spec;
    spec.kind = ExtractorSpec::Kind::External;
    spec.dir = dir.string();
    const Raster dummy = constant_raster(0.5, 8, 3);
    const Residual a = extract_residual(dummy, spec, "/some/where/photo.png");
    const Residual b = extract_residual(dummy, spec, "/some/where/photo.png");
    for (int c = 0; c < 3; ++c) {
        CHECK((a.planes[c] - (stored.planes[c] * 2.0 - 1.0)).abs().maxCoeff() < 1e-12);
        CHECK((a.planes[c] - b.planes[c]).abs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(extract_residual(dummy, spec, "/some/where/missing.png"), std::runtime_error);
}

TEST_CASE("extractor spec parsing") {
    CHECK(ExtractorSpec::parse("gaussian:2.5").sigma == doctest::Approx(2.5));
    CHECK(ExtractorSpec::parse("median:5").window == 5);
    const ExtractorSpec w = ExtractorSpec::parse("wavelet:3,0.05");
    CHECK(w.levels == 3);
    CHECK(w.threshold == doctest::Approx(0.05));
    CHECK_THROWS(ExtractorSpec::parse("median:4"));
    CHECK_THROWS(ExtractorSpec::parse("gaussian:-1"));
    CHECK_THROWS(ExtractorSpec::parse("unknown:1"));
}
