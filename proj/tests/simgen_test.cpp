#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "realonly/noise.hpp"
#include "realonly/simgen.hpp"
#include "realonly/spectrum.hpp"
#include "support/synthcam.hpp"

#include <cmath>

using namespace realonly;
using realonly::testsupport::synth_photo;

namespace {

Spectrum residual_spectrum(const Raster& img) {
    const Residual res = extract_residual(img, ExtractorSpec{});
    return merge_channels(res);
}

SimSpec spec_of(SimSpec::Method m, int f, std::uint64_t seed = 0) {
    SimSpec s;
    s.method = m;
    s.factor = f;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("factor 1 is an identity for nearest and bilinear") {
    const Raster img = synth_photo(1, 64);
    for (auto m : {SimSpec::Method::Nearest, SimSpec::Method::Bilinear}) {
        const Raster out = simulate(img, spec_of(m, 1));
        for (int c = 0; c < 3; ++c)
            CHECK((out.planes[c] - img.planes[c]).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("simulate preserves shape and value range") {
    const Raster img = synth_photo(2, 128);
    for (auto m : {SimSpec::Method::Nearest, SimSpec::Method::Bilinear,
                   SimSpec::Method::TransposedConv}) {
        for (int f : {2, 4, 8}) {
            const Raster out = simulate(img, spec_of(m, f, 3));
            CHECK(out.width == 128);
            CHECK(out.height == 128);
            CHECK(out.channels() == 3);
            for (int c = 0; c < 3; ++c) {
                CHECK(out.planes[c].minCoeff() >= 0.0);
                CHECK(out.planes[c].maxCoeff() <= 1.0);
            }
        }
    }
}

TEST_CASE("nearest simulate keeps 4x4 block interiors constant") {
    // Nearest upsampling makes each 4x4 block constant; the output stage's
    // 3x3 conv only mixes across block borders, so the 2x2 interior of every
    // block must still hold a single value.
    const Raster img = synth_photo(3, 64);
    const Raster out = simulate(img, spec_of(SimSpec::Method::Nearest, 4));
    for (int y = 0; y < 64; y += 4)
        for (int x = 0; x < 64; x += 4) {
            const double v = out.planes[0](y + 1, x + 1);
            CHECK(out.planes[0](y + 1, x + 2) == v);
            CHECK(out.planes[0](y + 2, x + 1) == v);
            CHECK(out.planes[0](y + 2, x + 2) == v);
        }
}

TEST_CASE("transposed conv is seed-deterministic") {
    const Raster img = synth_photo(4, 64);
    const Raster a = simulate(img, spec_of(SimSpec::Method::TransposedConv, 4, 21));
    const Raster b = simulate(img, spec_of(SimSpec::Method::TransposedConv, 4, 21));
    const Raster c = simulate(img, spec_of(SimSpec::Method::TransposedConv, 4, 22));
    double diff_ab = 0.0, diff_ac = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        diff_ab = std::max(diff_ab, (a.planes[ch] - b.planes[ch]).abs().maxCoeff());
        diff_ac = std::max(diff_ac, (a.planes[ch] - c.planes[ch]).abs().maxCoeff());
    }
    CHECK(diff_ab == 0.0);
    CHECK(diff_ac > 0.0);
}

TEST_CASE("peak_report on hand-built spectra") {
    SUBCASE("clean comb with zero off-peak energy caps at the sentinel") {
        Spectrum s;
        s.amp = Eigen::ArrayXXd::Zero(64, 64);
        for (int u = 0; u < 64; u += 16)
            for (int v = 0; v < 64; v += 16) s.amp(u, v) = 1.0;
        const PeakReport r = peak_report(s, 16);
        CHECK(r.ratio == kPeakRatioCap);
        CHECK(r.pass);
        CHECK(r.expected_period == 16);
    }
    SUBCASE("flat spectrum fails") {
        Spectrum s;
        s.amp = Eigen::ArrayXXd::Constant(64, 64, 1.0);
        const PeakReport r = peak_report(s, 16);
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-9));
        CHECK_FALSE(r.pass);
    }
    SUBCASE("2-D comb over a noise floor reports the mean/median ratio") {
        Spectrum s;
        s.amp = Eigen::ArrayXXd::Constant(64, 64, 0.01);
        for (int u = 0; u < 64; u += 16)
            for (int v = 0; v < 64; v += 16) s.amp(u, v) = 1.0;
        const PeakReport r = peak_report(s, 16);
        // Each peak window holds one 1.0 plus eight 0.01 bins; the upper-half
        // window score is (1 + 4*0.01)/5 against a 0.01 median floor.
        CHECK(r.ratio == doctest::Approx((1.0 + 4 * 0.01) / 5.0 / 0.01).epsilon(1e-9));
        CHECK(r.pass);
    }
    SUBCASE("DC neighborhood is excluded") {
        // Energy confined to the 3x3 block around DC must not count as a comb.
        Spectrum s;
        s.amp = Eigen::ArrayXXd::Constant(64, 64, 0.1);
        for (int u : {63, 0, 1})
            for (int v : {63, 0, 1}) s.amp(u, v) = 100.0;
        const PeakReport r = peak_report(s, 16);
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-9));
        CHECK_FALSE(r.pass);
    }
    SUBCASE("invalid period throws") {
        Spectrum s;
        s.amp = Eigen::ArrayXXd::Zero(8, 8);
        CHECK_THROWS(peak_report(s, 0));
        CHECK_THROWS(peak_report(s, 9));
    }
}

TEST_CASE("nearest x4 upsampling leaves a strong comb at period M/4") {
    int passes = 0;
    const int n = 6;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        const Raster img = synth_photo(100 + seed, 256);
        const Raster gen = simulate(img, spec_of(SimSpec::Method::Nearest, 4, seed));
        const PeakReport r = peak_report(residual_spectrum(gen), 256 / 4);
        if (r.pass) ++passes;
    }
    CHECK(passes == n);
}

TEST_CASE("bilinear x8 upsampling leaves a comb at period M/8") {
    int passes = 0;
    const int n = 6;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        const Raster img = synth_photo(200 + seed, 256);
        const Raster gen = simulate(img, spec_of(SimSpec::Method::Bilinear, 8, seed));
        const PeakReport r = peak_report(residual_spectrum(gen), 256 / 8);
        if (r.pass) ++passes;
    }
    CHECK(passes == n);
}

TEST_CASE("unprocessed photos show no comb") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Raster img = synth_photo(300 + seed, 256);
        const PeakReport r = peak_report(residual_spectrum(img), 64);
        CHECK(r.ratio < 2.0);
    }
}

TEST_CASE("spec validation and parsing") {
    CHECK_THROWS(spec_of(SimSpec::Method::Nearest, 3).validate());
    CHECK_THROWS(spec_of(SimSpec::Method::Nearest, 16).validate());
    CHECK_NOTHROW(spec_of(SimSpec::Method::Bilinear, 8).validate());

    const SimSpec s = SimSpec::parse("transposed_conv", 4, 9);
    CHECK(s.method == SimSpec::Method::TransposedConv);
    CHECK(s.factor == 4);
    CHECK(s.seed == 9);
    CHECK(s.method_name() == "transposed_conv");
    CHECK(SimSpec::parse("nearest", 2, 0).method == SimSpec::Method::Nearest);
    CHECK(SimSpec::parse("bilinear", 2, 0).method == SimSpec::Method::Bilinear);
    CHECK_THROWS(SimSpec::parse("lanczos", 2, 0));

    const Raster img = synth_photo(5, 60);  // not divisible by 8
    CHECK_THROWS(simulate(img, spec_of(SimSpec::Method::Nearest, 8)));
}
