#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "embsizer/dlrm/training.hpp"
#include "embsizer/supernet/network.hpp"

namespace embsizer::search {

struct EvaluatorConfig {
  std::size_t batches = 20;
  std::size_t batch_size = 512;
  std::uint64_t seed = 0;
};

// Scores subnets of a frozen supernet on a fixed validation subsample, with
// every field included and batch normalization in inference mode. The
// transformed embedding of every (field, candidate) is computed once up
// front, and results are memoized per selection. Safe to share across
// threads; the supernet must outlive the evaluator and stay unchanged.
class SubnetEvaluator {
 public:
  SubnetEvaluator(const supernet::Network& net, const data::SampleTable& validation,
                  const EvaluatorConfig& config);

  const data::SampleTable& subsample() const noexcept { return subsample_; }
  dlrm::EvalResult evaluate(std::span<const std::uint32_t> candidates) const;
  double auc(std::span<const std::uint32_t> candidates) const { return evaluate(candidates).auc; }
  std::vector<double> predict(std::span<const std::uint32_t> candidates) const;
  // Number of distinct selections scored so far.
  std::size_t evaluations() const;

 private:
  const supernet::Network* net_;
  data::SampleTable subsample_;
  std::vector<std::vector<Matrix>> cached_;  // [field][candidate] -> rows x d_f
  std::vector<char> all_included_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<std::uint32_t>, dlrm::EvalResult> memo_;
};

// Rows of the validation split used for scoring: all of them when the split
// has at most batches * batch_size rows, otherwise a seeded subset in
// ascending order.
std::vector<std::size_t> validation_subsample(std::size_t rows, const EvaluatorConfig& config);

}  // namespace embsizer::search
