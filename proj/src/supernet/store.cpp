#include "embsizer/supernet/store.hpp"

#include <algorithm>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::supernet {

EmbeddingStore::EmbeddingStore(const data::Schema& schema, std::vector<std::vector<std::size_t>> sizes,
                               Scheme scheme, RngStream& rng, double init_bound)
    : scheme_(scheme), sizes_(std::move(sizes)) {
  if (sizes_.size() != schema.size()) throw ConfigError("store: one size list per field required");
  tables_.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& d = sizes_[i];
    CandidateSet{d}.validate();
    const std::string base = "emb.f" + std::to_string(i);
    if (scheme_ == Scheme::Shared) {
      tables_[i].emplace_back(base + ".shared", schema[i].cardinality, d.back(), schema[i].multi_valued, rng,
                              init_bound);
    } else {
      for (std::size_t j = 0; j < d.size(); ++j) {
        tables_[i].emplace_back(base + ".c" + std::to_string(j), schema[i].cardinality, d[j],
                                schema[i].multi_valued, rng, init_bound);
      }
    }
  }
}

std::size_t EmbeddingStore::size_of(std::size_t field, std::uint32_t c) const {
  const auto& d = sizes_.at(field);
  if (c >= d.size()) {
    throw ConfigError("candidate index " + std::to_string(c) + " out of range for field " + std::to_string(field));
  }
  return d[c];
}

const dlrm::EmbeddingTable& EmbeddingStore::table(std::size_t field, std::uint32_t c) const {
  size_of(field, c);
  return scheme_ == Scheme::Shared ? tables_[field][0] : tables_[field][c];
}

dlrm::EmbeddingTable& EmbeddingStore::table(std::size_t field, std::uint32_t c) {
  size_of(field, c);
  return scheme_ == Scheme::Shared ? tables_[field][0] : tables_[field][c];
}

std::size_t EmbeddingStore::prefix(std::size_t field, std::uint32_t c) const {
  return scheme_ == Scheme::Shared ? size_of(field, c) : 0;
}

Matrix EmbeddingStore::lookup(std::size_t field, std::uint32_t c, const data::FieldColumn& column) const {
  return table(field, c).lookup(column, prefix(field, c));
}

void EmbeddingStore::backward(std::size_t field, std::uint32_t c, const data::FieldColumn& column,
                              const Matrix& d_out) {
  if (d_out.cols() != size_of(field, c)) throw ConfigError("store backward: width mismatch");
  table(field, c).backward(column, d_out);
}

Matrix EmbeddingStore::view(std::size_t field, std::uint32_t c) const {
  const Matrix& v = table(field, c).param().value;
  const std::size_t w = size_of(field, c);
  Matrix out(v.rows(), w);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t k = 0; k < w; ++k) out(r, k) = v(r, k);
  return out;
}

double EmbeddingStore::variance(std::size_t field, std::uint32_t c) const {
  const Matrix& v = table(field, c).param().value;
  const std::size_t w = size_of(field, c);
  const double n = static_cast<double>(v.rows() * w);
  double sum = 0.0;
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t k = 0; k < w; ++k) sum += v(r, k);
  const double mean = sum / n;
  double sq = 0.0;
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t k = 0; k < w; ++k) sq += (v(r, k) - mean) * (v(r, k) - mean);
  return sq / n;
}

Matrix EmbeddingStore::variances() const {
  std::size_t t = 0;
  for (const auto& d : sizes_) t = std::max(t, d.size());
  Matrix out(num_fields(), t);
  for (std::size_t i = 0; i < num_fields(); ++i)
    for (std::uint32_t c = 0; c < sizes_[i].size(); ++c) out(i, c) = variance(i, c);
  return out;
}

std::uint64_t EmbeddingStore::parameter_count() const {
  std::uint64_t total = 0;
  for (const auto& field : tables_)
    for (const auto& t : field) total += t.param().value.size();
  return total;
}

void EmbeddingStore::collect(std::vector<Parameter*>& out) {
  for (auto& field : tables_)
    for (auto& t : field) out.push_back(&t.param());
}

void EmbeddingStore::collect(std::vector<const Parameter*>& out) const {
  for (const auto& field : tables_)
    for (const auto& t : field) out.push_back(&t.param());
}

}  // namespace embsizer::supernet
