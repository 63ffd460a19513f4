#pragma once

#include <span>
#include <vector>

namespace embsizer {

inline constexpr double kProbabilityClamp = 1e-7;

// -y log(p) - (1 - y) log(1 - p) with p clamped to [1e-7, 1 - 1e-7].
// Throws DataError for labels outside {0, 1}.
double cross_entropy(double y_hat, double y);

struct LossOutput {
  double loss = 0.0;              // batch mean
  std::vector<double> d_logits;   // (sigmoid(logit) - y) / batch
};

// Same loss computed from logits without clamping, so it stays smooth and
// consistent with d_logits for any finite logit.
LossOutput binary_cross_entropy_with_logits(std::span<const double> logits,
                                            std::span<const double> labels);

}  // namespace embsizer
