#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embsizer/core/matrix.hpp"

namespace embsizer {

class RngStream;

// A trainable tensor with its gradient and Adam moment accumulators.
//
// Parameters track which region received gradient during the current step.
// Dense parameters are touched as a whole; embedding tables are touched
// row-by-row over a column prefix. The optimizer only updates touched
// regions, so an embedding table that is not sampled in a step (or the
// columns of a shared max-table beyond the sampled prefix) is left exactly as
// it was.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, std::size_t rows, std::size_t cols)
      : name(std::move(name)), value(rows, cols), grad(rows, cols), m(rows, cols), v(rows, cols) {}

  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;
  std::uint64_t steps = 0;

  void touch_all() { dense_touched_ = true; }
  void touch_rows(std::span<const std::uint32_t> rows, std::size_t col_prefix);

  bool touched() const noexcept { return dense_touched_ || !touched_rows_.empty(); }
  bool dense_touched() const noexcept { return dense_touched_; }
  std::span<const std::uint32_t> touched_rows() const noexcept { return touched_rows_; }
  std::size_t touched_cols() const noexcept { return touched_cols_; }

  // Zeroes the gradient over the touched region and clears the touch marks.
  void zero_grad();

  void init_uniform(RngStream& rng, double bound);
  void init_zero();

 private:
  bool dense_touched_ = false;
  std::vector<std::uint32_t> touched_rows_;
  std::vector<char> row_flag_;
  std::size_t touched_cols_ = 0;
};

// Rounds every entry to the nearest 32-bit float. Training in 32-bit storage
// mode applies this after each update so that parameters are exactly
// representable in the checkpoint container.
void round_to_float(Matrix& m);

// Order-sensitive checksum of parameter values; used to assert that two
// models share no weights.
std::uint64_t checksum(std::span<const Parameter* const> params);

}  // namespace embsizer
