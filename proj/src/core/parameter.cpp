#include "embsizer/core/parameter.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer {

void Parameter::touch_rows(std::span<const std::uint32_t> rows, std::size_t col_prefix) {
  if (col_prefix > value.cols()) throw ConfigError("touch_rows: prefix wider than parameter");
  if (row_flag_.size() != value.rows()) row_flag_.assign(value.rows(), 0);
  for (std::uint32_t r : rows) {
    if (r >= value.rows()) throw DataError("touch_rows: row index out of range in " + name);
    if (!row_flag_[r]) {
      row_flag_[r] = 1;
      touched_rows_.push_back(r);
    }
  }
  touched_cols_ = std::max(touched_cols_, col_prefix);
}

void Parameter::zero_grad() {
  if (dense_touched_) {
    grad.fill(0.0);
  } else {
    for (std::uint32_t r : touched_rows_) {
      auto g = grad.row(r);
      std::fill(g.begin(), g.end(), 0.0);
    }
  }
  for (std::uint32_t r : touched_rows_) row_flag_[r] = 0;
  touched_rows_.clear();
  touched_cols_ = 0;
  dense_touched_ = false;
}

void Parameter::init_uniform(RngStream& rng, double bound) {
  for (double& x : value.values()) x = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
}

void Parameter::init_zero() { value.fill(0.0); }

void round_to_float(Matrix& m) {
  for (double& x : m.values()) x = static_cast<double>(static_cast<float>(x));
}

std::uint64_t checksum(std::span<const Parameter* const> params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Parameter* p : params) {
    for (double x : p->value.values()) {
      const auto bits = std::bit_cast<std::uint64_t>(x);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffU;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

}  // namespace embsizer
