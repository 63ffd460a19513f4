#include "embsizer/dlrm/training.hpp"

#include "embsizer/analysis/metrics.hpp"
#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::dlrm {

nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"split", r.split}, {"auc", r.result.auc}, {"logloss", r.result.logloss}};
}

std::vector<double> predict_all(const PredictFn& predict, const data::SampleTable& table,
                                std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<double> out;
  out.reserve(table.size());
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < table.size(); begin += batch_size) {
    const std::size_t end = std::min(table.size(), begin + batch_size);
    if (begin == 0 && end == table.size()) return predict(table);
    rows.clear();
    for (std::size_t r = begin; r < end; ++r) rows.push_back(r);
    auto p = predict(table.gather(rows));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

EvalResult evaluate(const PredictFn& predict, const data::SampleTable& table, std::size_t batch_size) {
  if (table.empty()) throw DataError("cannot evaluate on an empty split");
  auto p = predict_all(predict, table, batch_size);
  return {analysis::auc(p, table.labels()), analysis::logloss(p, table.labels())};
}

std::vector<double> run_epoch(const StepFn& step, const data::SampleTable& table, std::size_t epoch,
                              const EpochOptions& options) {
  if (options.batch_size == 0) throw ConfigError("batch size must be positive");
  const auto order = data::shuffled_rows(table.size(), mix_seed(options.shuffle_seed, epoch));
  std::vector<double> losses;
  for (auto rows : data::chunk(order, options.batch_size)) {
    if (options.max_batches != 0 && losses.size() >= options.max_batches) break;
    if (rows.size() < options.min_batch) continue;
    losses.push_back(step(table.gather(rows)));
  }
  return losses;
}

}  // namespace embsizer::dlrm
