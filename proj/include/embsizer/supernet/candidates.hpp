#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embsizer/data/schema.hpp"

namespace embsizer::supernet {

enum class Scheme { Independent, Shared };

const char* to_string(Scheme s) noexcept;
Scheme scheme_from_string(const std::string& s);

// Candidate embedding sizes, strictly ascending.
struct CandidateSet {
  std::vector<std::size_t> sizes{2, 8, 16, 32, 64};

  void validate() const;
  std::size_t count() const noexcept { return sizes.size(); }
  std::size_t max() const { return sizes.back(); }
  // Index of `size`; ConfigError if absent.
  std::uint32_t index_of(std::size_t size) const;
  // Index of the candidate closest to `size` (smaller on ties).
  std::uint32_t nearest(std::size_t size) const;
};

// Embedding-parameter counts. All exact integer arithmetic.
std::uint64_t independent_param_count(const data::Schema& schema, const CandidateSet& d);
std::uint64_t shared_param_count(const data::Schema& schema, const CandidateSet& d);
std::uint64_t assignment_param_count(const data::Schema& schema, std::span<const std::size_t> sizes);

// 1 - (sum_i n_i d_i) / (sum_i n_i * baseline). Negative when the assignment
// is larger than the baseline.
double parameter_reduction(const data::Schema& schema, std::span<const std::size_t> sizes,
                           std::size_t baseline = 32);

}  // namespace embsizer::supernet
