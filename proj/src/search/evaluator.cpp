#include "embsizer/search/evaluator.hpp"

#include <algorithm>

#include "embsizer/analysis/metrics.hpp"
#include "embsizer/core/error.hpp"

namespace embsizer::search {

std::vector<std::size_t> validation_subsample(std::size_t rows, const EvaluatorConfig& config) {
  const std::size_t want = config.batches * config.batch_size;
  if (want == 0) throw ConfigError("evaluator subsample size must be positive");
  if (rows <= want) {
    std::vector<std::size_t> all(rows);
    for (std::size_t r = 0; r < rows; ++r) all[r] = r;
    return all;
  }
  auto order = data::shuffled_rows(rows, config.seed);
  order.resize(want);
  std::sort(order.begin(), order.end());
  return order;
}

SubnetEvaluator::SubnetEvaluator(const supernet::Network& net, const data::SampleTable& validation,
                                 const EvaluatorConfig& config)
    : net_(&net), all_included_(net.num_fields(), 1) {
  if (validation.empty()) throw ConfigError("search needs a non-empty validation split");
  subsample_ = validation.gather(validation_subsample(validation.size(), config));
  const auto& store = net.store();
  cached_.resize(net.num_fields());
  for (std::size_t i = 0; i < net.num_fields(); ++i)
    for (std::uint32_t c = 0; c < store.num_candidates(i); ++c)
      cached_[i].push_back(net.transformed(i, c, subsample_.column(i)));
}

std::vector<double> SubnetEvaluator::predict(std::span<const std::uint32_t> candidates) const {
  const std::size_t m = net_->num_fields();
  const std::size_t d_f = net_->d_f();
  if (candidates.size() != m) throw ConfigError("selection length differs from the field count");
  const std::size_t n = subsample_.size();
  Matrix block(n, m * d_f);
  for (std::size_t i = 0; i < m; ++i) {
    if (candidates[i] >= cached_[i].size()) throw ConfigError("selection index out of range");
    const Matrix& e = cached_[i][candidates[i]];
    for (std::size_t r = 0; r < n; ++r)
      std::copy(e.row(r).begin(), e.row(r).end(), block.row(r).begin() + static_cast<std::ptrdiff_t>(i * d_f));
  }
  auto z = net_->main().predict(block, subsample_, all_included_);
  for (double& v : z) v = sigmoid(v);
  return z;
}

dlrm::EvalResult SubnetEvaluator::evaluate(std::span<const std::uint32_t> candidates) const {
  std::vector<std::uint32_t> key(candidates.begin(), candidates.end());
  {
    std::lock_guard lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const auto p = predict(candidates);
  const dlrm::EvalResult r{analysis::auc(p, subsample_.labels()), analysis::logloss(p, subsample_.labels())};
  std::lock_guard lock(mutex_);
  memo_.emplace(std::move(key), r);
  return r;
}

std::size_t SubnetEvaluator::evaluations() const {
  std::lock_guard lock(mutex_);
  return memo_.size();
}

}  // namespace embsizer::search
