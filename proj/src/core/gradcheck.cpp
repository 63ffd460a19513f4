#include "embsizer/core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer {

double finite_difference_check(const std::function<double()>& loss, Parameter& p,
                               const Matrix& analytic, const GradCheckOptions& options) {
  if (!analytic.same_shape(p.value)) throw ConfigError("finite_difference_check: shape mismatch");
  std::vector<std::size_t> coords(p.value.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > options.max_coords) {
    RngStream rng(options.seed);
    for (std::size_t i = 0; i < options.max_coords; ++i) {
      const std::size_t j = i + rng.uniform_int(coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(options.max_coords);
  }
  double worst = 0.0;
  double* w = p.value.data();
  for (std::size_t k : coords) {
    const double saved = w[k];
    w[k] = saved + options.h;
    const double plus = loss();
    w[k] = saved - options.h;
    const double minus = loss();
    w[k] = saved;
    const double numeric = (plus - minus) / (2.0 * options.h);
    const double a = analytic.data()[k];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace embsizer
