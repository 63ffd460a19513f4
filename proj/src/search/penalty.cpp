#include "embsizer/search/penalty.hpp"

#include <cmath>

#include "embsizer/core/error.hpp"

namespace embsizer::search {

PenaltyConfig PenaltyConfig::preset(const std::string& mode) {
  if (mode == "effect") return effect_first();
  if (mode == "resource") return resource_first();
  throw ConfigError("unknown mode '" + mode + "' (expected effect or resource)");
}

void PenaltyConfig::validate() const {
  if (!(lambda_r >= 0.0) || !(lambda_c >= 0.0)) throw ConfigError("penalty weights must be >= 0");
  if (!(lambda_rew > 0.0)) throw ConfigError("reward scale must be > 0");
}

PenaltyTerms compute_penalty(const Matrix& p, std::span<const std::size_t> sizes, const PenaltyConfig& config) {
  if (p.cols() != sizes.size()) throw ConfigError("penalty: P width differs from the candidate count");
  const std::size_t m = p.rows();
  const std::size_t t = p.cols();
  PenaltyTerms out;
  out.d_p = Matrix(m, t);
  if (m == 0) return out;
  const double inv_m = 1.0 / static_cast<double>(m);
  const double u = 1.0 / static_cast<double>(t);
  double resource = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      resource += static_cast<double>(sizes[j]) * p(i, j);
      norm_sq += (p(i, j) - u) * (p(i, j) - u);
    }
    const double norm = std::sqrt(norm_sq);
    spread += norm;
    for (std::size_t j = 0; j < t; ++j) {
      out.d_p(i, j) = config.lambda_r * inv_m * static_cast<double>(sizes[j]);
      if (norm > 0.0) out.d_p(i, j) -= config.lambda_c * inv_m * (p(i, j) - u) / norm;
    }
  }
  out.resource = config.lambda_r * inv_m * resource;
  out.competition = -config.lambda_c * inv_m * spread;
  return out;
}

double expected_param_count(const Matrix& p, std::span<const std::size_t> sizes,
                            std::span<const std::uint32_t> cardinalities) {
  if (p.cols() != sizes.size() || p.rows() != cardinalities.size()) {
    throw ConfigError("expected_param_count: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) row += static_cast<double>(sizes[j]) * p(i, j);
    total += static_cast<double>(cardinalities[i]) * row;
  }
  return total;
}

}  // namespace embsizer::search
