#include "embsizer/analysis/stability.hpp"

#include <sstream>

#include "embsizer/analysis/parallel.hpp"
#include "embsizer/core/error.hpp"

namespace embsizer::analysis {

std::string stability_csv(const StabilityReport& r) {
  std::ostringstream os;
  os << "field";
  for (std::size_t d : r.sizes) os << ',' << d;
  os << ",mode_size,mode_frequency\n";
  for (std::size_t i = 0; i < r.fields.size(); ++i) {
    os << r.fields[i];
    for (std::size_t c : r.histogram[i]) os << ',' << c;
    os << ',' << r.mode_size[i] << ',' << r.mode_frequency[i] << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json fields = nlohmann::json::array();
  for (std::size_t i = 0; i < r.fields.size(); ++i) {
    fields.push_back({{"field", r.fields[i]},
                      {"histogram", r.histogram[i]},
                      {"mode_size", r.mode_size[i]},
                      {"mode_frequency", r.mode_frequency[i]}});
  }
  return {{"repetitions", r.repetitions()}, {"sizes", r.sizes}, {"fields", fields}, {"runs", r.runs}};
}

StabilityReport stability_eval(const SearchFn& search, const data::Schema& schema,
                               const supernet::CandidateSet& candidates, std::span<const std::uint64_t> seeds,
                               std::size_t workers) {
  if (seeds.empty()) throw ConfigError("stability needs at least one repetition");
  StabilityReport r;
  for (const auto& f : schema) r.fields.push_back(f.name);
  r.sizes = candidates.sizes;
  r.runs.resize(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t k) {
    r.runs[k] = search(seeds[k]);
    if (r.runs[k].size() != schema.size()) throw ConfigError("search returned the wrong number of sizes");
  });
  r.histogram.assign(schema.size(), std::vector<std::size_t>(candidates.count(), 0));
  for (const auto& run : r.runs)
    for (std::size_t i = 0; i < schema.size(); ++i) ++r.histogram[i][candidates.index_of(run[i])];
  for (std::size_t i = 0; i < schema.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.count(); ++c)
      if (r.histogram[i][c] > r.histogram[i][best]) best = c;
    r.mode_size.push_back(candidates.sizes[best]);
    r.mode_frequency.push_back(static_cast<double>(r.histogram[i][best]) / static_cast<double>(seeds.size()));
  }
  return r;
}

}  // namespace embsizer::analysis
