#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/data/dataset.hpp"
#include "embsizer/dlrm/training.hpp"
#include "embsizer/search/evaluator.hpp"
#include "embsizer/supernet/candidates.hpp"

namespace embsizer::analysis {

struct ConsistencyConfig {
  std::size_t k = 20;
  std::size_t standalone_epochs = 2;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct ArchitectureScore {
  std::vector<std::uint32_t> candidates;
  std::vector<std::size_t> sizes;
  dlrm::EvalResult inherited;
  dlrm::EvalResult standalone;
};

struct ConsistencyReport {
  std::size_t k = 0;
  double tau_auc = 0.0;
  double tau_logloss = 0.0;
  std::vector<ArchitectureScore> rows;
};
nlohmann::json to_json(const ConsistencyReport& r);

// `k` distinct assignments drawn uniformly from D^M (candidate indices). If
// k exceeds T^M it is capped, with a warning, and every assignment is used.
std::vector<std::vector<std::uint32_t>> sample_architectures(std::size_t fields, std::size_t t, std::size_t k,
                                                             std::uint64_t seed);

// Stand-alone score of an assignment (sizes per field).
using StandaloneFn = std::function<dlrm::EvalResult(std::span<const std::size_t>)>;

// Trains a fresh fixed-size network for `epochs` epochs and scores it on
// `eval_rows` (the same rows the inherited leg uses).
StandaloneFn standalone_scorer(const data::DatasetSplit& split, const data::SampleTable& eval_rows,
                               const supernet::NetworkConfig& config, std::size_t epochs, std::uint64_t seed,
                               std::size_t batch_size = 512);

// Kendall tau between the inherited-weight and stand-alone rankings of k
// sampled subnets, for AUC and for LogLoss.
ConsistencyReport consistency_eval(const search::SubnetEvaluator& inherited, const supernet::CandidateSet& candidates,
                                   const StandaloneFn& standalone, const ConsistencyConfig& config);

}  // namespace embsizer::analysis
