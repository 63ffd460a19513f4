#include "embsizer/analysis/consistency.hpp"

#include <cmath>
#include <set>

#include <spdlog/spdlog.h>

#include "embsizer/analysis/metrics.hpp"
#include "embsizer/analysis/parallel.hpp"
#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/retrain/retrain.hpp"

namespace embsizer::analysis {

nlohmann::json to_json(const ConsistencyReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : r.rows) {
    rows.push_back({{"sizes", a.sizes},
                    {"inherited_auc", a.inherited.auc},
                    {"inherited_logloss", a.inherited.logloss},
                    {"standalone_auc", a.standalone.auc},
                    {"standalone_logloss", a.standalone.logloss}});
  }
  return {{"K", r.k}, {"tau_auc", r.tau_auc}, {"tau_logloss", r.tau_logloss}, {"architectures", rows}};
}

std::vector<std::vector<std::uint32_t>> sample_architectures(std::size_t fields, std::size_t t, std::size_t k,
                                                             std::uint64_t seed) {
  if (fields == 0 || t == 0) throw ConfigError("sample_architectures: empty search space");
  // T^M, saturating.
  double space = std::pow(static_cast<double>(t), static_cast<double>(fields));
  std::vector<std::vector<std::uint32_t>> out;
  if (static_cast<double>(k) >= space) {
    if (static_cast<double>(k) > space) {
      spdlog::warn("K={} exceeds the {} distinct assignments; using all of them", k, static_cast<std::size_t>(space));
    }
    const auto total = static_cast<std::size_t>(space);
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<std::uint32_t> a(fields);
      std::size_t rest = code;
      for (std::size_t i = 0; i < fields; ++i) {
        a[i] = static_cast<std::uint32_t>(rest % t);
        rest /= t;
      }
      out.push_back(std::move(a));
    }
    return out;
  }
  RngStream rng(seed);
  std::set<std::vector<std::uint32_t>> seen;
  while (out.size() < k) {
    std::vector<std::uint32_t> a(fields);
    for (auto& c : a) c = static_cast<std::uint32_t>(rng.uniform_int(t));
    if (seen.insert(a).second) out.push_back(std::move(a));
  }
  return out;
}

StandaloneFn standalone_scorer(const data::DatasetSplit& split, const data::SampleTable& eval_rows,
                               const supernet::NetworkConfig& config, std::size_t epochs, std::uint64_t seed,
                               std::size_t batch_size) {
  return [&split, &eval_rows, config, epochs, seed, batch_size](std::span<const std::size_t> sizes) {
    retrain::RetrainOptions o;
    o.epochs = epochs;
    o.batch_size = batch_size;
    o.early_stopping = false;
    o.evaluate_test = false;
    o.seed = seed;
    auto r = retrain::retrain(split, sizes, config, o);
    const auto sel = supernet::full_selection(std::vector<std::uint32_t>(sizes.size(), 0));
    return dlrm::evaluate([&](const data::SampleTable& t) { return r.model.predict(t, sel); }, eval_rows);
  };
}

ConsistencyReport consistency_eval(const search::SubnetEvaluator& inherited, const supernet::CandidateSet& candidates,
                                   const StandaloneFn& standalone, const ConsistencyConfig& config) {
  const std::size_t m = inherited.subsample().num_fields();
  auto archs = sample_architectures(m, candidates.count(), config.k, config.seed);
  ConsistencyReport report;
  report.k = archs.size();
  report.rows.resize(archs.size());
  parallel_for(archs.size(), config.workers, [&](std::size_t a) {
    auto& row = report.rows[a];
    row.candidates = archs[a];
    for (std::uint32_t c : archs[a]) row.sizes.push_back(candidates.sizes[c]);
    row.inherited = inherited.evaluate(row.candidates);
    row.standalone = standalone(row.sizes);
  });
  std::vector<double> ia, sa, il, sl;
  for (const auto& r : report.rows) {
    ia.push_back(r.inherited.auc);
    sa.push_back(r.standalone.auc);
    il.push_back(r.inherited.logloss);
    sl.push_back(r.standalone.logloss);
  }
  report.tau_auc = kendall_tau(ia, sa);
  report.tau_logloss = kendall_tau(il, sl);
  return report;
}

}  // namespace embsizer::analysis
