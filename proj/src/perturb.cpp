#include "realonly/perturb.hpp"

#include "realonly/imagio.hpp"
#include "realonly/metrics.hpp"
#include "realonly/noise.hpp"
#include "realonly/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace realonly {

namespace {

struct KindInfo {
    const char* name;
    double lo, hi;          // allowed parameter range
    bool stochastic;
    double psnr_lo, psnr_hi;  // documented PSNR interval for stochastic kinds
};

const std::map<PerturbSpec::Kind, KindInfo>& kind_table() {
    static const std::map<PerturbSpec::Kind, KindInfo> table = {
        {PerturbSpec::Kind::Blur, {"blur", 0.1, 1.0, false, 0, 0}},
        {PerturbSpec::Kind::Brightness, {"brightness", 0.3, 3.0, false, 0, 0}},
        {PerturbSpec::Kind::Gamma, {"gamma", 0.3, 3.0, false, 0, 0}},
        {PerturbSpec::Kind::Crop, {"crop", 96, 256, false, 0, 0}},
        {PerturbSpec::Kind::Jpeg, {"jpeg", 70, 100, false, 0, 0}},
        {PerturbSpec::Kind::GaussNoise, {"gauss", 1.0, 10.0, true, 26, 47}},
        {PerturbSpec::Kind::SaltPepper, {"saltpepper", 0.001, 0.01, true, 18, 31}},
        {PerturbSpec::Kind::Speckle, {"speckle", 0.01, 0.1, true, 22, 57}},
        {PerturbSpec::Kind::Poisson, {"poisson", 0.1, 1.0, true, 3, 58}},
    };
    return table;
}

// Fixed-size 3x3 gaussian blur used by the blur kind.
Raster blur3(const Raster& r, double sigma) {
    double k[3];
    k[0] = std::exp(-0.5 / (sigma * sigma));
    k[1] = 1.0;
    k[2] = k[0];
    const double sum = k[0] + k[1] + k[2];
    for (double& v : k) v /= sum;

    Raster out = r;
    const int h = r.height, w = r.width;
    for (Plane& p : out.planes) {
        Plane tmp(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                tmp(y, x) = k[0] * p(y, std::max(x - 1, 0)) + k[1] * p(y, x) +
                            k[2] * p(y, std::min(x + 1, w - 1));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                p(y, x) = k[0] * tmp(std::max(y - 1, 0), x) + k[1] * tmp(y, x) +
                          k[2] * tmp(std::min(y + 1, h - 1), x);
    }
    return out;
}

Raster salt_pepper(const Raster& r, double density, std::uint64_t seed) {
    Raster out = r;
    const std::uint64_t total = static_cast<std::uint64_t>(r.width) * r.height;
    const std::uint64_t n = static_cast<std::uint64_t>(std::llround(density * total));
    const std::uint64_t pepper = n / 2;
    CounterRng rng(seed, 0x5A17);

    // Distinct positions so pepper and salt pixel counts differ by at most 1.
    std::vector<bool> used(total, false);
    std::uint64_t ctr = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t pos;
        do {
            pos = rng.bits(ctr++) % total;
        } while (used[pos]);
        used[pos] = true;
        const int y = static_cast<int>(pos / r.width);
        const int x = static_cast<int>(pos % r.width);
        const double value = i < pepper ? 0.0 : 1.0;
        for (Plane& p : out.planes) p(y, x) = value;
    }
    return out;
}

}  // namespace

void PerturbSpec::validate() const {
    const KindInfo& info = kind_table().at(kind);
    if (param < info.lo || param > info.hi)
        throw std::invalid_argument(std::string(info.name) + ": parameter " +
                                    std::to_string(param) + " outside [" +
                                    std::to_string(info.lo) + "," + std::to_string(info.hi) + "]");
}

std::string PerturbSpec::to_string() const {
    const KindInfo& info = kind_table().at(kind);
    std::string s = std::string(info.name) + ":" + std::to_string(param);
    if (info.stochastic) s += "@seed=" + std::to_string(seed);
    return s;
}

PerturbSpec PerturbSpec::parse(const std::string& text) {
    std::string body = text;
    PerturbSpec spec;
    if (auto at = body.find("@seed="); at != std::string::npos) {
        spec.seed = std::stoull(body.substr(at + 6));
        body = body.substr(0, at);
    }
    auto colon = body.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("perturb spec needs kind:param, got " + text);
    const std::string name = body.substr(0, colon);
    spec.param = std::stod(body.substr(colon + 1));

    bool found = false;
    for (const auto& [kind, info] : kind_table()) {
        if (name == info.name) {
            spec.kind = kind;
            found = true;
            break;
        }
    }
    if (!found) throw std::invalid_argument("unknown perturbation kind: " + name);
    spec.validate();
    return spec;
}

Raster apply(const Raster& raster, const PerturbSpec& spec) {
    spec.validate();
    if (!raster.valid()) throw std::invalid_argument("perturb apply: invalid raster");

    Raster out;
    switch (spec.kind) {
        case PerturbSpec::Kind::Blur:
            out = blur3(raster, spec.param);
            break;
        case PerturbSpec::Kind::Brightness:
            out = raster;
            if (spec.param != 1.0)
                for (Plane& p : out.planes) p *= spec.param;
            break;
        case PerturbSpec::Kind::Gamma:
            out = raster;
            if (spec.param != 1.0)
                for (Plane& p : out.planes) p = p.max(0.0).pow(spec.param);
            break;
        case PerturbSpec::Kind::Crop:
            out = center_crop(raster, static_cast<int>(spec.param));
            break;
        case PerturbSpec::Kind::Jpeg: {
            auto bytes = encode_jpeg(raster, static_cast<int>(spec.param));
            out = decode_jpeg(bytes.data(), bytes.size());
            break;
        }
        case PerturbSpec::Kind::GaussNoise: {
            out = raster;
            const double sigma = spec.param / 255.0;
            for (int c = 0; c < out.channels(); ++c) {
                CounterRng rng(spec.seed, static_cast<std::uint64_t>(c));
                Plane& p = out.planes[c];
                std::uint64_t ctr = 0;
                for (int y = 0; y < out.height; ++y)
                    for (int x = 0; x < out.width; ++x) p(y, x) += sigma * rng.gaussian(ctr++);
            }
            break;
        }
        case PerturbSpec::Kind::SaltPepper:
            out = salt_pepper(raster, spec.param, spec.seed);
            break;
        case PerturbSpec::Kind::Speckle: {
            out = raster;
            for (int c = 0; c < out.channels(); ++c) {
                CounterRng rng(spec.seed, 0x600 + static_cast<std::uint64_t>(c));
                Plane& p = out.planes[c];
                std::uint64_t ctr = 0;
                for (int y = 0; y < out.height; ++y)
                    for (int x = 0; x < out.width; ++x)
                        p(y, x) *= 1.0 + spec.param * rng.gaussian(ctr++);
            }
            break;
        }
        case PerturbSpec::Kind::Poisson: {
            // x' = Poisson(x * lambda * 255) / (lambda * 255)
            out = raster;
            const double scale = spec.param * 255.0;
            for (int c = 0; c < out.channels(); ++c) {
                CounterRng rng(spec.seed, 0x901 + static_cast<std::uint64_t>(c));
                Plane& p = out.planes[c];
                std::uint64_t ctr = 0;
                for (int y = 0; y < out.height; ++y)
                    for (int x = 0; x < out.width; ++x)
                        p(y, x) = rng.poisson(ctr++, p(y, x) * scale) / scale;
            }
            break;
        }
    }
    out.clamp01();
    return out;
}

PsnrRangeReport psnr_range_check(PerturbSpec::Kind kind, const std::vector<double>& param_grid,
                                 const std::vector<Raster>& test_set, std::uint64_t seed) {
    const KindInfo& info = kind_table().at(kind);
    if (!info.stochastic) throw std::invalid_argument("psnr_range_check: stochastic kinds only");
    if (test_set.empty() || param_grid.empty())
        throw std::invalid_argument("psnr_range_check: empty input");

    PsnrRangeReport rep;
    rep.kind = kind;
    rep.expected_lo = info.psnr_lo;
    rep.expected_hi = info.psnr_hi;
    rep.min_psnr = std::numeric_limits<double>::infinity();
    rep.max_psnr = -std::numeric_limits<double>::infinity();
    std::uint64_t s = seed;
    for (double param : param_grid) {
        for (const Raster& img : test_set) {
            PerturbSpec spec{kind, param, s++};
            const double p = psnr(img, apply(img, spec));
            rep.min_psnr = std::min(rep.min_psnr, p);
            rep.max_psnr = std::max(rep.max_psnr, p);
        }
    }
    rep.overlaps = rep.min_psnr <= rep.expected_hi && rep.max_psnr >= rep.expected_lo;
    return rep;
}

}  // namespace realonly
