#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "embsizer/data/schema.hpp"

namespace embsizer::data {

// One sample in row form. Used for construction and tests; storage is
// columnar (SampleTable).
struct Sample {
  std::vector<std::vector<std::uint32_t>> values;  // per field
  double label = 0.0;
  std::int64_t timestamp = 0;
};

// Per-field value lists in CSR layout.
class FieldColumn {
 public:
  std::size_t rows() const noexcept { return offsets_.size() - 1; }
  std::span<const std::uint32_t> values(std::size_t row) const noexcept {
    return {indices_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<const std::uint32_t> offsets() const noexcept { return offsets_; }
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }

  void push(std::span<const std::uint32_t> values);
  void reserve(std::size_t rows, std::size_t nnz);

  static FieldColumn from_csr(std::vector<std::uint32_t> offsets, std::vector<std::uint32_t> indices);

  friend bool operator==(const FieldColumn&, const FieldColumn&) = default;

 private:
  std::vector<std::uint32_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
};

// Columnar store of samples: one FieldColumn per field plus labels and
// timestamps. A training batch is a SampleTable too.
class SampleTable {
 public:
  explicit SampleTable(std::size_t num_fields = 0) : columns_(num_fields) {}

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t num_fields() const noexcept { return columns_.size(); }

  const FieldColumn& column(std::size_t field) const { return columns_.at(field); }
  std::span<const double> labels() const noexcept { return labels_; }
  std::span<const std::int64_t> timestamps() const noexcept { return timestamps_; }

  void append(const Sample& s);
  void append_row(const SampleTable& src, std::size_t row);
  SampleTable gather(std::span<const std::size_t> rows) const;
  Sample sample(std::size_t row) const;

  // Index bounds and one-hot arity against the schema; throws DataError.
  void validate(const Schema& schema) const;

  static SampleTable from_parts(std::vector<FieldColumn> columns, std::vector<double> labels,
                                std::vector<std::int64_t> timestamps);

  friend bool operator==(const SampleTable&, const SampleTable&) = default;

 private:
  std::vector<FieldColumn> columns_;
  std::vector<double> labels_;
  std::vector<std::int64_t> timestamps_;
};

// Row indices [0, n) in a Fisher-Yates order drawn from `seed`.
std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed);

// Consecutive chunks of `order` of at most `batch_size` rows.
std::vector<std::span<const std::size_t>> chunk(std::span<const std::size_t> order,
                                                std::size_t batch_size);

}  // namespace embsizer::data
