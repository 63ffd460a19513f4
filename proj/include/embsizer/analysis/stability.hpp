#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/data/schema.hpp"
#include "embsizer/supernet/candidates.hpp"

namespace embsizer::analysis {

struct StabilityReport {
  std::vector<std::string> fields;
  std::vector<std::size_t> sizes;                  // candidate sizes (columns)
  std::vector<std::vector<std::size_t>> histogram;  // field x candidate counts
  std::vector<std::vector<std::size_t>> runs;       // per run, size per field
  std::vector<std::size_t> mode_size;               // per field (smaller size on ties)
  std::vector<double> mode_frequency;               // per field

  std::size_t repetitions() const noexcept { return runs.size(); }
};

// field,<size>,...,mode_size,mode_frequency
std::string stability_csv(const StabilityReport& r);
nlohmann::json to_json(const StabilityReport& r);

// One search run: returns the searched size per field.
using SearchFn = std::function<std::vector<std::size_t>(std::uint64_t seed)>;

// Runs the search once per seed and tallies the chosen size of each field.
StabilityReport stability_eval(const SearchFn& search, const data::Schema& schema,
                               const supernet::CandidateSet& candidates, std::span<const std::uint64_t> seeds,
                               std::size_t workers = 1);

}  // namespace embsizer::analysis
