#pragma once

#include <string>

#include "embsizer/core/matrix.hpp"
#include "embsizer/core/parameter.hpp"
#include "embsizer/data/sample_table.hpp"

namespace embsizer {
class RngStream;
}

namespace embsizer::dlrm {

// One field's embedding table V_i (cardinality x width). Lookups may read a
// column prefix, which is how shared-scheme candidates view the max-table.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(const std::string& name, std::size_t rows, std::size_t width, bool multi_valued,
                 RngStream& rng, double init_bound);
  // Zero-initialized; draws nothing from any stream.
  static EmbeddingTable zeros(const std::string& name, std::size_t rows, std::size_t width,
                              bool multi_valued);

  std::size_t rows() const noexcept { return param_.value.rows(); }
  std::size_t width() const noexcept { return param_.value.cols(); }
  bool multi_valued() const noexcept { return multi_valued_; }

  // Row r of the result is the indexed row of sample r (one-hot) or the mean
  // of its indexed rows (multi-hot; zero for an empty list), restricted to
  // the first `prefix` columns. prefix == 0 means the full width.
  Matrix lookup(const data::FieldColumn& column, std::size_t prefix = 0) const;
  // Scatters d_out into the gradient of the indexed rows only.
  void backward(const data::FieldColumn& column, const Matrix& d_out);

  Parameter& param() noexcept { return param_; }
  const Parameter& param() const noexcept { return param_; }

 private:
  Parameter param_;
  bool multi_valued_ = false;
};

}  // namespace embsizer::dlrm
