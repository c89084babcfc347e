#include "realonly/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace realonly {

double accuracy(const std::vector<Label>& preds, const std::vector<Label>& labels) {
    if (preds.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (preds.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(preds.size());
}

double average_precision(const std::vector<ScoredLabel>& scored) {
    std::size_t positives = 0;
    for (const auto& s : scored)
        if (s.label == Label::Generated) ++positives;
    if (positives == 0) throw std::invalid_argument("average_precision: no positive examples");

    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].score > scored[b].score;
    });

    double ap = 0.0;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (scored[order[rank]].label != Label::Generated) continue;
        ++tp;
        const double precision = static_cast<double>(tp) / static_cast<double>(rank + 1);
        ap += precision / static_cast<double>(positives);  // recall step = 1/P
    }
    return ap;
}

double f1(const std::vector<Label>& preds, const std::vector<Label>& labels) {
    if (preds.size() != labels.size()) throw std::invalid_argument("f1: length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == Label::Generated;
        const bool t = labels[i] == Label::Generated;
        if (p && t) ++tp;
        else if (p && !t) ++fp;
        else if (!p && t) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0 ? 2.0 * tp / denom : 0.0;
}

double psnr(const Raster& a, const Raster& b) {
    if (a.width != b.width || a.height != b.height || a.channels() != b.channels())
        throw std::invalid_argument("psnr: shape mismatch");
    double mse = 0.0;
    for (int c = 0; c < a.channels(); ++c) mse += (a.planes[c] - b.planes[c]).square().sum();
    mse /= static_cast<double>(a.width) * a.height * a.channels();
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace realonly
