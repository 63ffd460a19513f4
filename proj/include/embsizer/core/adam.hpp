#pragma once

#include <span>

#include "embsizer/core/parameter.hpp"

namespace embsizer {

enum class Precision { F64, F32 };

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Precision precision = Precision::F64;
};

// Adam over the touched region of each parameter. Bias correction uses the
// parameter's own step count, so a table that sits out some steps is
// corrected for the updates it actually received.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  void set_lr(double lr) noexcept { config_.lr = lr; }

  // Applies one update to every touched parameter, then zeroes its gradient.
  // Throws NumericError if an update produces a non-finite value.
  void step(std::span<Parameter* const> params) const;

 private:
  AdamConfig config_;
};

}  // namespace embsizer
