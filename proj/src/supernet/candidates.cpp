#include "embsizer/supernet/candidates.hpp"

#include "embsizer/core/error.hpp"

namespace embsizer::supernet {

const char* to_string(Scheme s) noexcept { return s == Scheme::Independent ? "independent" : "shared"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "independent") return Scheme::Independent;
  if (s == "shared") return Scheme::Shared;
  throw ConfigError("unknown scheme '" + s + "' (expected independent or shared)");
}

void CandidateSet::validate() const {
  if (sizes.empty()) throw ConfigError("candidate set is empty");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] == 0) throw ConfigError("candidate sizes must be >= 1");
    if (j > 0 && sizes[j] <= sizes[j - 1]) throw ConfigError("candidate sizes must be strictly ascending");
  }
}

std::uint32_t CandidateSet::index_of(std::size_t size) const {
  for (std::size_t j = 0; j < sizes.size(); ++j)
    if (sizes[j] == size) return static_cast<std::uint32_t>(j);
  throw ConfigError("size " + std::to_string(size) + " is not a candidate");
}

std::uint32_t CandidateSet::nearest(std::size_t size) const {
  std::uint32_t best = 0;
  auto gap = [&](std::size_t d) { return d > size ? d - size : size - d; };
  for (std::size_t j = 1; j < sizes.size(); ++j)
    if (gap(sizes[j]) < gap(sizes[best])) best = static_cast<std::uint32_t>(j);
  return best;
}

std::uint64_t independent_param_count(const data::Schema& schema, const CandidateSet& d) {
  std::uint64_t width = 0;
  for (std::size_t s : d.sizes) width += s;
  std::uint64_t total = 0;
  for (const auto& f : schema) total += static_cast<std::uint64_t>(f.cardinality) * width;
  return total;
}

std::uint64_t shared_param_count(const data::Schema& schema, const CandidateSet& d) {
  std::uint64_t total = 0;
  for (const auto& f : schema) total += static_cast<std::uint64_t>(f.cardinality) * d.max();
  return total;
}

std::uint64_t assignment_param_count(const data::Schema& schema, std::span<const std::size_t> sizes) {
  if (sizes.size() != schema.size()) throw ConfigError("assignment length differs from field count");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) total += static_cast<std::uint64_t>(schema[i].cardinality) * sizes[i];
  return total;
}

double parameter_reduction(const data::Schema& schema, std::span<const std::size_t> sizes,
                           std::size_t baseline) {
  const std::vector<std::size_t> base(schema.size(), baseline);
  const auto ours = assignment_param_count(schema, sizes);
  const auto ref = assignment_param_count(schema, base);
  if (ref == 0) throw ConfigError("parameter_reduction: empty baseline");
  return 1.0 - static_cast<double>(ours) / static_cast<double>(ref);
}

}  // namespace embsizer::supernet
