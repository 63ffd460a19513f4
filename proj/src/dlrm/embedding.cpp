#include "embsizer/dlrm/embedding.hpp"

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::dlrm {

EmbeddingTable::EmbeddingTable(const std::string& name, std::size_t rows, std::size_t width,
                               bool multi_valued, RngStream& rng, double init_bound)
    : param_(name, rows, width), multi_valued_(multi_valued) {
  if (rows == 0 || width == 0) throw ConfigError("embedding table '" + name + "' has zero extent");
  param_.init_uniform(rng, init_bound);
}

EmbeddingTable EmbeddingTable::zeros(const std::string& name, std::size_t rows, std::size_t width,
                                     bool multi_valued) {
  if (rows == 0 || width == 0) throw ConfigError("embedding table '" + name + "' has zero extent");
  EmbeddingTable t;
  t.param_ = Parameter(name, rows, width);
  t.multi_valued_ = multi_valued;
  return t;
}

Matrix EmbeddingTable::lookup(const data::FieldColumn& column, std::size_t prefix) const {
  const std::size_t w = prefix == 0 ? width() : prefix;
  if (w > width()) throw ConfigError("lookup prefix wider than table '" + param_.name + "'");
  Matrix out(column.rows(), w);
  for (std::size_t r = 0; r < column.rows(); ++r) {
    auto idx = column.values(r);
    if (!multi_valued_ && idx.size() != 1) {
      throw DataError("one-hot field '" + param_.name + "' got " + std::to_string(idx.size()) +
                      " indices in batch row " + std::to_string(r));
    }
    if (idx.empty()) continue;
    auto o = out.row(r);
    const double scale = 1.0 / static_cast<double>(idx.size());
    for (std::uint32_t v : idx) {
      if (v >= rows()) throw DataError("index " + std::to_string(v) + " out of range for '" + param_.name + "'");
      auto src = param_.value.row(v);
      for (std::size_t j = 0; j < w; ++j) o[j] += scale * src[j];
    }
  }
  return out;
}

void EmbeddingTable::backward(const data::FieldColumn& column, const Matrix& d_out) {
  if (d_out.rows() != column.rows() || d_out.cols() > width()) {
    throw ConfigError("embedding backward shape mismatch for '" + param_.name + "'");
  }
  const std::size_t w = d_out.cols();
  for (std::size_t r = 0; r < column.rows(); ++r) {
    auto idx = column.values(r);
    if (idx.empty()) continue;
    const double scale = 1.0 / static_cast<double>(idx.size());
    auto g = d_out.row(r);
    for (std::uint32_t v : idx) {
      auto dst = param_.grad.row(v);
      for (std::size_t j = 0; j < w; ++j) dst[j] += scale * g[j];
    }
  }
  param_.touch_rows(column.indices(), w);
}

}  // namespace embsizer::dlrm
