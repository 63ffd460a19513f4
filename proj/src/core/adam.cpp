#include "embsizer/core/adam.hpp"

#include <cmath>

#include "embsizer/core/error.hpp"

namespace embsizer {

namespace {

struct Coefficients {
  double beta1, beta2, eps, step_size, inv_bias2;
  bool to_float;
};

inline void update_range(Parameter& p, std::size_t begin, std::size_t end, const Coefficients& c) {
  double* w = p.value.data();
  const double* g = p.grad.data();
  double* m = p.m.data();
  double* v = p.v.data();
  for (std::size_t k = begin; k < end; ++k) {
    m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
    v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
    const double v_hat = v[k] * c.inv_bias2;
    double updated = w[k] - c.step_size * m[k] / (std::sqrt(v_hat) + c.eps);
    if (c.to_float) updated = static_cast<double>(static_cast<float>(updated));
    if (!std::isfinite(updated)) {
      throw NumericError("Adam produced a non-finite value in parameter '" + p.name + "'");
    }
    w[k] = updated;
  }
}

}  // namespace

void Adam::step(std::span<Parameter* const> params) const {
  for (Parameter* p : params) {
    if (!p->touched()) continue;
    ++p->steps;
    const double t = static_cast<double>(p->steps);
    const double bias1 = 1.0 - std::pow(config_.beta1, t);
    const double bias2 = 1.0 - std::pow(config_.beta2, t);
    const Coefficients c{config_.beta1, config_.beta2, config_.eps, config_.lr / bias1,
                         1.0 / bias2, config_.precision == Precision::F32};
    if (p->dense_touched()) {
      update_range(*p, 0, p->value.size(), c);
    } else {
      const std::size_t cols = p->value.cols();
      for (std::uint32_t r : p->touched_rows()) {
        const std::size_t base = static_cast<std::size_t>(r) * cols;
        update_range(*p, base, base + p->touched_cols(), c);
      }
    }
    p->zero_grad();
  }
}

}  // namespace embsizer
