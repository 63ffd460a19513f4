#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/search/evaluator.hpp"
#include "embsizer/search/penalty.hpp"
#include "embsizer/search/policy.hpp"
#include "embsizer/supernet/candidates.hpp"

namespace embsizer::search {

struct SearchConfig {
  PenaltyConfig penalty;
  PolicyConfig policy;
  double lr = 5e-4;
  std::size_t max_steps = 500;
  double entropy_threshold = 0.1;
  // Exponential moving-average reward baseline.
  bool use_baseline = true;
  double baseline_decay = 0.9;
  // Assignments drawn from P per step; their policy-gradient terms are averaged.
  std::size_t samples_per_step = 1;
  // Size the initial state starts from (nearest candidate).
  std::size_t initial_size = 16;
  EvaluatorConfig evaluator;

  void validate() const;
};

nlohmann::json search_config_to_json(const SearchConfig& c);
SearchConfig search_config_from_json(const nlohmann::json& j);

struct SearchStep {
  std::size_t step = 0;
  double reward = 0.0;  // mean over the step's samples, after lambda_rew scaling
  double baseline = 0.0;
  double penalty = 0.0;
  double resource = 0.0;
  double competition = 0.0;
  double entropy = 0.0;  // of the P the step acted on
  std::vector<std::uint32_t> action;
};

struct SearchResult {
  Matrix p;
  std::vector<std::uint32_t> candidates;  // row argmax, ties to the smaller size
  std::vector<std::size_t> sizes;
  std::vector<SearchStep> history;
  bool converged = false;
};

// Accuracy signal of an assignment (candidate index per field).
using RewardFn = std::function<double(std::span<const std::uint32_t>)>;

// One policy update: loss = -(mean over samples of sum_i log P[i, a_i]) *
// (reward - baseline) + penalty(P). Returns the penalty terms at P.
PenaltyTerms reinforce_step(PolicyNet& policy, Adam& adam, std::span<const std::uint32_t> state,
                            std::span<const std::vector<std::uint32_t>> actions, double advantage,
                            std::span<const std::size_t> sizes, const PenaltyConfig& penalty);

// Repeats {P = policy(state); draw actions from P; reward; update; state =
// last action} until the mean row entropy of P drops below the threshold or
// max_steps updates have been made. Randomness comes from `seed` (policy
// initialization and action draws use separate roles).
SearchResult run_search(const RewardFn& reward, std::size_t fields, const supernet::CandidateSet& candidates,
                        const SearchConfig& config, std::uint64_t seed);

// Search on a frozen supernet scored by validation AUC.
SearchResult run_search(const SubnetEvaluator& evaluator, const supernet::CandidateSet& candidates,
                        const SearchConfig& config, std::uint64_t seed);

// step,reward,baseline,penalty,resource,competition,entropy
std::string history_csv(const std::vector<SearchStep>& history);
// One row per field, one column per candidate size.
std::string matrix_csv(const Matrix& p, const data::Schema& schema, std::span<const std::size_t> sizes);

}  // namespace embsizer::search
