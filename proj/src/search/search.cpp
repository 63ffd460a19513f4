#include "embsizer/search/search.hpp"

#include <cmath>
#include <sstream>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/retrain/retrain.hpp"

namespace embsizer::search {

void SearchConfig::validate() const {
  penalty.validate();
  if (!(lr >= 0.0)) throw ConfigError("search lr must be >= 0");
  if (!(entropy_threshold >= 0.0)) throw ConfigError("entropy threshold must be >= 0");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw ConfigError("baseline decay must be in [0,1)");
  if (samples_per_step == 0) throw ConfigError("samples_per_step must be >= 1");
  if (policy.d_model == 0 || policy.heads == 0 || policy.d_model % policy.heads != 0) {
    throw ConfigError("policy d_model must be a positive multiple of the head count");
  }
}

nlohmann::json search_config_to_json(const SearchConfig& c) {
  return {{"lambda_r", c.penalty.lambda_r},
          {"lambda_c", c.penalty.lambda_c},
          {"lambda_rew", c.penalty.lambda_rew},
          {"lr", c.lr},
          {"max_steps", c.max_steps},
          {"entropy_threshold", c.entropy_threshold},
          {"use_baseline", c.use_baseline},
          {"baseline_decay", c.baseline_decay},
          {"samples_per_step", c.samples_per_step},
          {"initial_size", c.initial_size},
          {"d_model", c.policy.d_model},
          {"heads", c.policy.heads},
          {"ff_width", c.policy.ff_width},
          {"eval_batches", c.evaluator.batches},
          {"eval_batch_size", c.evaluator.batch_size}};
}

SearchConfig search_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("search config must be an object");
  SearchConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "mode") {
      const auto preset = PenaltyConfig::preset(value.get<std::string>());
      c.penalty.lambda_r = preset.lambda_r;
      c.penalty.lambda_c = preset.lambda_c;
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "mode") continue;
    else if (key == "lambda_r") c.penalty.lambda_r = value.get<double>();
    else if (key == "lambda_c") c.penalty.lambda_c = value.get<double>();
    else if (key == "lambda_rew") c.penalty.lambda_rew = value.get<double>();
    else if (key == "lr") c.lr = value.get<double>();
    else if (key == "max_steps") c.max_steps = value.get<std::size_t>();
    else if (key == "entropy_threshold") c.entropy_threshold = value.get<double>();
    else if (key == "use_baseline") c.use_baseline = value.get<bool>();
    else if (key == "baseline_decay") c.baseline_decay = value.get<double>();
    else if (key == "samples_per_step") c.samples_per_step = value.get<std::size_t>();
    else if (key == "initial_size") c.initial_size = value.get<std::size_t>();
    else if (key == "d_model") c.policy.d_model = value.get<std::size_t>();
    else if (key == "heads") c.policy.heads = value.get<std::size_t>();
    else if (key == "ff_width") c.policy.ff_width = value.get<std::size_t>();
    else if (key == "eval_batches") c.evaluator.batches = value.get<std::size_t>();
    else if (key == "eval_batch_size") c.evaluator.batch_size = value.get<std::size_t>();
    else throw ConfigError("unknown search config key '" + key + "'");
  }
  c.validate();
  return c;
}

PenaltyTerms reinforce_step(PolicyNet& policy, Adam& adam, std::span<const std::uint32_t> state,
                            std::span<const std::vector<std::uint32_t>> actions, double advantage,
                            std::span<const std::size_t> sizes, const PenaltyConfig& penalty) {
  const Matrix p = policy.forward(state);
  PenaltyTerms terms = compute_penalty(p, sizes, penalty);
  Matrix d_logits = softmax_backward(p, terms.d_p);
  // d/dz of -log softmax(z)[a] is P - onehot(a).
  const double w = advantage / static_cast<double>(actions.size());
  for (const auto& a : actions) {
    if (a.size() != p.rows()) throw ConfigError("action length differs from the field count");
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) d_logits(i, j) += w * (p(i, j) - (a[i] == j ? 1.0 : 0.0));
  }
  policy.backward(d_logits);
  auto params = policy.parameters();
  adam.step(params);
  return terms;
}

SearchResult run_search(const RewardFn& reward, std::size_t fields, const supernet::CandidateSet& candidates,
                        const SearchConfig& config, std::uint64_t seed) {
  config.validate();
  candidates.validate();
  RngStream init_rng(role_seed(seed, SeedRole::Init));
  RngStream action_rng(role_seed(seed, SeedRole::Search));
  PolicyNet policy(fields, candidates.count(), config.policy, init_rng);
  Adam adam({.lr = config.lr});

  std::vector<std::uint32_t> state(fields, candidates.nearest(config.initial_size));
  SearchResult result;
  bool have_baseline = false;
  double baseline = 0.0;
  for (std::size_t step = 0;; ++step) {
    const Matrix p = policy.probabilities(state);
    const double entropy = mean_row_entropy(p);
    if (entropy < config.entropy_threshold) {
      result.converged = true;
      break;
    }
    if (step >= config.max_steps) break;

    std::vector<std::vector<std::uint32_t>> actions;
    double mean_reward = 0.0;
    for (std::size_t s = 0; s < config.samples_per_step; ++s) {
      std::vector<std::uint32_t> a(fields);
      for (std::size_t i = 0; i < fields; ++i) a[i] = static_cast<std::uint32_t>(action_rng.categorical(p.row(i)));
      const double r = config.penalty.lambda_rew * reward(a);
      if (!std::isfinite(r)) {
        throw NumericError("non-finite reward at search step " + std::to_string(step));
      }
      mean_reward += r / static_cast<double>(config.samples_per_step);
      actions.push_back(std::move(a));
    }
    if (config.use_baseline && !have_baseline) {
      baseline = mean_reward;
      have_baseline = true;
    }
    const double b = config.use_baseline ? baseline : 0.0;
    const auto terms = reinforce_step(policy, adam, state, actions, mean_reward - b, candidates.sizes, config.penalty);
    result.history.push_back(
        {step + 1, mean_reward, b, terms.total(), terms.resource, terms.competition, entropy, actions.back()});
    if (config.use_baseline) baseline = config.baseline_decay * baseline + (1.0 - config.baseline_decay) * mean_reward;
    state = actions.back();
  }
  result.p = policy.probabilities(state);
  result.candidates = retrain::extract_candidates(result.p);
  for (std::uint32_t c : result.candidates) result.sizes.push_back(candidates.sizes[c]);
  return result;
}

SearchResult run_search(const SubnetEvaluator& evaluator, const supernet::CandidateSet& candidates,
                        const SearchConfig& config, std::uint64_t seed) {
  return run_search([&](std::span<const std::uint32_t> a) { return evaluator.auc(a); },
                    evaluator.subsample().num_fields(), candidates, config, seed);
}

std::string history_csv(const std::vector<SearchStep>& history) {
  std::ostringstream os;
  os.precision(10);
  os << "step,reward,baseline,penalty,resource,competition,entropy\n";
  for (const auto& h : history) {
    os << h.step << ',' << h.reward << ',' << h.baseline << ',' << h.penalty << ',' << h.resource << ','
       << h.competition << ',' << h.entropy << '\n';
  }
  return os.str();
}

std::string matrix_csv(const Matrix& p, const data::Schema& schema, std::span<const std::size_t> sizes) {
  std::ostringstream os;
  os.precision(10);
  os << "field";
  for (std::size_t d : sizes) os << ',' << d;
  os << '\n';
  for (std::size_t i = 0; i < p.rows(); ++i) {
    os << schema.at(i).name;
    for (double x : p.row(i)) os << ',' << x;
    os << '\n';
  }
  return os.str();
}

}  // namespace embsizer::search
