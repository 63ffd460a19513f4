#include "embsizer/data/sample_table.hpp"

#include <numeric>
#include <string>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::data {

void FieldColumn::push(std::span<const std::uint32_t> values) {
  indices_.insert(indices_.end(), values.begin(), values.end());
  offsets_.push_back(static_cast<std::uint32_t>(indices_.size()));
}

void FieldColumn::reserve(std::size_t rows, std::size_t nnz) {
  offsets_.reserve(rows + 1);
  indices_.reserve(nnz);
}

FieldColumn FieldColumn::from_csr(std::vector<std::uint32_t> offsets,
                                  std::vector<std::uint32_t> indices) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != indices.size()) {
    throw FormatError("FieldColumn: inconsistent CSR offsets");
  }
  for (std::size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] < offsets[i - 1]) throw FormatError("FieldColumn: decreasing offsets");
  FieldColumn c;
  c.offsets_ = std::move(offsets);
  c.indices_ = std::move(indices);
  return c;
}

void SampleTable::append(const Sample& s) {
  if (s.values.size() != columns_.size()) {
    throw DataError("sample has " + std::to_string(s.values.size()) + " fields, table has " +
                    std::to_string(columns_.size()));
  }
  if (s.label != 0.0 && s.label != 1.0) throw DataError("label is not in {0,1}");
  for (std::size_t f = 0; f < columns_.size(); ++f) columns_[f].push(s.values[f]);
  labels_.push_back(s.label);
  timestamps_.push_back(s.timestamp);
}

void SampleTable::append_row(const SampleTable& src, std::size_t row) {
  for (std::size_t f = 0; f < columns_.size(); ++f) columns_[f].push(src.columns_[f].values(row));
  labels_.push_back(src.labels_[row]);
  timestamps_.push_back(src.timestamps_[row]);
}

SampleTable SampleTable::gather(std::span<const std::size_t> rows) const {
  SampleTable out(columns_.size());
  for (std::size_t f = 0; f < columns_.size(); ++f) out.columns_[f].reserve(rows.size(), rows.size());
  out.labels_.reserve(rows.size());
  out.timestamps_.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw ConfigError("gather: row out of range");
    out.append_row(*this, r);
  }
  return out;
}

Sample SampleTable::sample(std::size_t row) const {
  Sample s;
  for (const auto& c : columns_) {
    auto v = c.values(row);
    s.values.emplace_back(v.begin(), v.end());
  }
  s.label = labels_.at(row);
  s.timestamp = timestamps_.at(row);
  return s;
}

void SampleTable::validate(const Schema& schema) const {
  if (schema.size() != columns_.size()) throw DataError("table/schema field count mismatch");
  for (std::size_t f = 0; f < columns_.size(); ++f) {
    const auto& c = columns_[f];
    for (std::size_t r = 0; r < c.rows(); ++r) {
      auto v = c.values(r);
      if (!schema[f].multi_valued && v.size() != 1) {
        throw DataError("row " + std::to_string(r) + ": one-hot field '" + schema[f].name +
                        "' carries " + std::to_string(v.size()) + " indices");
      }
      for (std::uint32_t idx : v) {
        if (idx >= schema[f].cardinality) {
          throw DataError("row " + std::to_string(r) + ": index " + std::to_string(idx) +
                          " out of range for field '" + schema[f].name + "'");
        }
      }
    }
  }
}

SampleTable SampleTable::from_parts(std::vector<FieldColumn> columns, std::vector<double> labels,
                                    std::vector<std::int64_t> timestamps) {
  for (const auto& c : columns)
    if (c.rows() != labels.size()) throw FormatError("SampleTable: column length mismatch");
  if (timestamps.size() != labels.size()) throw FormatError("SampleTable: timestamp length");
  for (double y : labels)
    if (y != 0.0 && y != 1.0) throw DataError("label is not in {0,1}");
  SampleTable t;
  t.columns_ = std::move(columns);
  t.labels_ = std::move(labels);
  t.timestamps_ = std::move(timestamps);
  return t;
}

std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
  return order;
}

std::vector<std::span<const std::size_t>> chunk(std::span<const std::size_t> order,
                                                std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::span<const std::size_t>> out;
  for (std::size_t b = 0; b < order.size(); b += batch_size) {
    out.push_back(order.subspan(b, std::min(batch_size, order.size() - b)));
  }
  return out;
}

}  // namespace embsizer::data
