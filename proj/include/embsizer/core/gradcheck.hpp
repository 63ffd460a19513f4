#pragma once

#include <cstdint>
#include <functional>

#include "embsizer/core/matrix.hpp"
#include "embsizer/core/parameter.hpp"

namespace embsizer {

struct GradCheckOptions {
  double h = 1e-5;
  // Coordinates checked; all of them when the parameter is smaller.
  std::size_t max_coords = 48;
  std::uint64_t seed = 7;
  // Denominator floor, so coordinates whose true gradient is ~0 are judged
  // by absolute error.
  double floor = 1e-6;
};

// Compares `analytic` (d loss / d p, same shape as p.value) against central
// differences of `loss` evaluated while perturbing p.value in place. Returns
// the max relative error |a - n| / max(|a|, |n|, floor) over sampled
// coordinates. p.value is restored before returning.
double finite_difference_check(const std::function<double()>& loss, Parameter& p,
                               const Matrix& analytic, const GradCheckOptions& options = {});

}  // namespace embsizer
