#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/data/sample_table.hpp"

namespace embsizer::dlrm {

struct EvalResult {
  double auc = 0.0;
  double logloss = 0.0;
};

// One line of the metrics stream: {epoch, split, auc, logloss}.
struct EpochRecord {
  std::size_t epoch = 0;
  std::string split;
  EvalResult result;
};
nlohmann::json to_json(const EpochRecord& r);

using PredictFn = std::function<std::vector<double>(const data::SampleTable&)>;
using StepFn = std::function<double(const data::SampleTable&)>;

// Probabilities for every row, computed in chunks of `batch_size`.
std::vector<double> predict_all(const PredictFn& predict, const data::SampleTable& table,
                                std::size_t batch_size);
EvalResult evaluate(const PredictFn& predict, const data::SampleTable& table,
                    std::size_t batch_size = 4096);

struct EpochOptions {
  std::size_t batch_size = 512;
  std::uint64_t shuffle_seed = 0;
  // Batches with fewer rows are skipped (batch statistics need two rows).
  std::size_t min_batch = 2;
  // Stop after this many batches when nonzero.
  std::size_t max_batches = 0;
};

// One pass over `table` in an order drawn from mix_seed(shuffle_seed, epoch).
// Returns the per-batch losses.
std::vector<double> run_epoch(const StepFn& step, const data::SampleTable& table, std::size_t epoch,
                              const EpochOptions& options);

}  // namespace embsizer::dlrm
