#include "embsizer/core/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "embsizer/core/error.hpp"
#include "embsizer/core/layers.hpp"

namespace embsizer {

double cross_entropy(double y_hat, double y) {
  if (y != 0.0 && y != 1.0) throw DataError("label " + std::to_string(y) + " is not in {0,1}");
  const double p = std::clamp(y_hat, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return y == 1.0 ? -std::log(p) : -std::log(1.0 - p);
}

LossOutput binary_cross_entropy_with_logits(std::span<const double> logits,
                                            std::span<const double> labels) {
  if (logits.size() != labels.size()) throw ConfigError("loss: logits/labels length mismatch");
  LossOutput out;
  out.d_logits.resize(logits.size());
  if (logits.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw NumericError("loss: non-finite logit");
    const double z = logits[i], y = labels[i];
    if (y != 0.0 && y != 1.0) throw DataError("label " + std::to_string(y) + " is not in {0,1}");
    // softplus(z) - y z, evaluated without forming p: going through a rounded
    // probability costs precision for large |z| and the probability clamp
    // would flatten the loss while its gradient stays p - y.
    total += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
    out.d_logits[i] = (sigmoid(z) - y) * inv_n;
  }
  out.loss = total * inv_n;
  return out;
}

}  // namespace embsizer
