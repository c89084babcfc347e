#pragma once

#include "realonly/types.hpp"

#include <vector>

namespace realonly {

// Positive class is "generated" throughout; score = higher means more likely
// generated.
enum class Label { Real, Generated };

struct ScoredLabel {
    double score = 0.0;
    Label label = Label::Real;
};

double accuracy(const std::vector<Label>& preds, const std::vector<Label>& labels);

// Step-interpolated AP: sort by score descending (stable on ties), sum
// precision at every positive rank weighted by the recall increment.
double average_precision(const std::vector<ScoredLabel>& scored);

double f1(const std::vector<Label>& preds, const std::vector<Label>& labels);

// 10*log10(1/MSE) on [0,1] data; +infinity for identical inputs.
double psnr(const Raster& a, const Raster& b);

}  // namespace realonly
