#pragma once

#include <vector>

#include "embsizer/dlrm/embedding.hpp"
#include "embsizer/supernet/candidates.hpp"

namespace embsizer::supernet {

// Candidate embeddings for every field. Independent: one table per
// (field, candidate). Shared: one max-table per field; candidate j reads and
// writes its first d_j columns.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  // sizes[i] lists field i's candidate sizes, ascending.
  EmbeddingStore(const data::Schema& schema, std::vector<std::vector<std::size_t>> sizes, Scheme scheme,
                 RngStream& rng, double init_bound);

  Scheme scheme() const noexcept { return scheme_; }
  std::size_t num_fields() const noexcept { return sizes_.size(); }
  std::size_t num_candidates(std::size_t field) const { return sizes_.at(field).size(); }
  std::size_t size_of(std::size_t field, std::uint32_t c) const;
  const std::vector<std::vector<std::size_t>>& sizes() const noexcept { return sizes_; }

  Matrix lookup(std::size_t field, std::uint32_t c, const data::FieldColumn& column) const;
  void backward(std::size_t field, std::uint32_t c, const data::FieldColumn& column, const Matrix& d_out);

  // Copy of candidate c's table (n_i x d_c).
  Matrix view(std::size_t field, std::uint32_t c) const;
  // Population variance over every entry of candidate c's table.
  double variance(std::size_t field, std::uint32_t c) const;
  // Fields x max-candidates matrix of variances (fields with fewer candidates
  // are padded with zero).
  Matrix variances() const;

  // Stored embedding parameters.
  std::uint64_t parameter_count() const;

  std::vector<dlrm::EmbeddingTable>& tables(std::size_t field) { return tables_.at(field); }
  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  const dlrm::EmbeddingTable& table(std::size_t field, std::uint32_t c) const;
  dlrm::EmbeddingTable& table(std::size_t field, std::uint32_t c);
  // Column prefix a candidate reads (0 = the whole table).
  std::size_t prefix(std::size_t field, std::uint32_t c) const;

  Scheme scheme_ = Scheme::Independent;
  std::vector<std::vector<std::size_t>> sizes_;
  std::vector<std::vector<dlrm::EmbeddingTable>> tables_;
};

}  // namespace embsizer::supernet
