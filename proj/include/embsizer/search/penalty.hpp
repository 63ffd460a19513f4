#pragma once

#include <span>
#include <string>

#include "embsizer/core/matrix.hpp"

namespace embsizer::search {

struct PenaltyConfig {
  double lambda_r = 0.0025;  // resource term weight
  double lambda_c = 0.08;    // competition term weight
  double lambda_rew = 1.0;   // reward scale

  static PenaltyConfig effect_first() { return {0.0025, 0.08, 1.0}; }
  static PenaltyConfig resource_first() { return {0.005, 0.04, 1.0}; }
  // "effect" or "resource".
  static PenaltyConfig preset(const std::string& mode);
  void validate() const;
};

struct PenaltyTerms {
  double resource = 0.0;     // lambda_r / M * sum_ij d_j P_ij
  double competition = 0.0;  // -lambda_c / M * sum_i ||P_i - 1/T||_2
  Matrix d_p;                // gradient of the total w.r.t. P

  double total() const noexcept { return resource + competition; }
};

// The competition norm has no gradient at a uniform row; zero is used there.
PenaltyTerms compute_penalty(const Matrix& p, std::span<const std::size_t> sizes, const PenaltyConfig& config);

// sum_i n_i sum_j d_j P_ij.
double expected_param_count(const Matrix& p, std::span<const std::size_t> sizes,
                            std::span<const std::uint32_t> cardinalities);

}  // namespace embsizer::search
