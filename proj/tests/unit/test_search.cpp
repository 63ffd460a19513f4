#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "embsizer/core/adam.hpp"
#include "embsizer/core/error.hpp"
#include "embsizer/core/gradcheck.hpp"
#include "embsizer/core/layers.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/data/synthetic.hpp"
#include "embsizer/retrain/retrain.hpp"
#include "embsizer/search/attention.hpp"
#include "embsizer/search/evaluator.hpp"
#include "embsizer/search/penalty.hpp"
#include "embsizer/search/policy.hpp"
#include "embsizer/search/search.hpp"
#include "embsizer/supernet/trainer.hpp"
#include "helpers.hpp"

using namespace embsizer;
using namespace embsizer::search;

namespace {

const std::vector<std::size_t> kDefaultSizes{2, 8, 16, 32, 64};

void randomize(std::vector<Parameter*> params, RngStream& rng, double scale) {
  for (auto* p : params)
    for (double& v : p->value.values()) v = scale * rng.uniform(-1.0, 1.0);
}

double dot(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.data()[k] * b.data()[k];
  return s;
}

// Loss of one REINFORCE update with the reward frozen: advantage-weighted
// negative log-likelihood of the actions plus the penalty.
double composite_loss(const Matrix& p, const std::vector<std::uint32_t>& action, double advantage,
                      std::span<const std::size_t> sizes, const PenaltyConfig& cfg) {
  double nll = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) nll -= std::log(p(i, action[i]));
  return advantage * nll + compute_penalty(p, sizes, cfg).total();
}

supernet::NetworkConfig small_net() {
  supernet::NetworkConfig c;
  c.model.hidden = {16, 1};
  c.model.d_f = 8;
  c.model.lr = 1e-2;
  return c;
}

}  // namespace

TEST(Policy, FreshPolicyIsUniform) {
  RngStream rng(1);
  PolicyNet policy(4, 5, PolicyConfig{}, rng);
  const std::vector<std::uint32_t> state{2, 2, 0, 4};
  const Matrix p = policy.probabilities(state);
  ASSERT_EQ(p.rows(), 4u);
  ASSERT_EQ(p.cols(), 5u);
  for (double v : p.values()) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(Policy, RowsAreDistributionsForRandomParameters) {
  RngStream rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    PolicyNet policy(6, 4, PolicyConfig{}, rng);
    randomize(policy.parameters(), rng, 2.0);
    std::vector<std::uint32_t> state(6);
    for (auto& s : state) s = static_cast<std::uint32_t>(rng.uniform_int(4));
    const Matrix p = policy.probabilities(state);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double sum = 0.0;
      for (double v : p.row(i)) {
        EXPECT_GT(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Policy, TiedFieldsGetTiedRows) {
  RngStream rng(3);
  PolicyNet policy(4, 3, PolicyConfig{}, rng);
  randomize(policy.parameters(), rng, 1.0);
  auto& fe = policy.field_embedding().value;
  for (std::size_t k = 0; k < fe.cols(); ++k) fe(2, k) = fe(0, k);
  const std::vector<std::uint32_t> state{1, 0, 1, 2};
  const Matrix p = policy.probabilities(state);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p(0, j), p(2, j), 1e-12);
}

TEST(Policy, PermutingFieldsPermutesRows) {
  RngStream rng(4);
  PolicyNet policy(5, 3, PolicyConfig{}, rng);
  randomize(policy.parameters(), rng, 1.0);
  const std::vector<std::uint32_t> state{0, 1, 2, 1, 0};
  const Matrix p = policy.probabilities(state);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  const Matrix fe = policy.field_embedding().value;
  std::vector<std::uint32_t> permuted(5);
  for (std::size_t i = 0; i < 5; ++i) {
    permuted[i] = state[perm[i]];
    for (std::size_t k = 0; k < fe.cols(); ++k) policy.field_embedding().value(i, k) = fe(perm[i], k);
  }
  const Matrix q = policy.probabilities(permuted);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(q(i, j), p(perm[i], j), 1e-12);
}

TEST(Policy, ForwardMatchesPredict) {
  RngStream rng(5);
  PolicyNet policy(3, 4, PolicyConfig{}, rng);
  randomize(policy.parameters(), rng, 1.0);
  const std::vector<std::uint32_t> state{3, 0, 1};
  EXPECT_EQ(policy.forward(state), policy.probabilities(state));
}

TEST(Policy, EntropyOfUniformAndOneHotRows) {
  EXPECT_NEAR(mean_row_entropy(Matrix(3, 5, 0.2)), std::log(5.0), 1e-12);
  EXPECT_EQ(mean_row_entropy(Matrix::from_rows({{1, 0}, {0, 1}})), 0.0);
}

class AttentionGradients : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(AttentionGradients, MultiHeadAttentionMatchesFiniteDifferences) {
  RngStream rng(GetParam());
  MultiHeadAttention mha("mha", 8, 2, rng);
  const Matrix x0 = testutil::random_matrix(5, 8, rng);
  const Matrix g = testutil::random_matrix(5, 8, rng);
  Parameter x("x", 5, 8);
  x.value = x0;
  auto loss = [&] { return dot(mha.forward(x.value), g); };
  loss();
  const Matrix dx = mha.backward(g);
  std::vector<Parameter*> params;
  mha.collect(params);
  std::vector<Matrix> grads;
  for (auto* p : params) grads.push_back(p->grad);
  for (std::size_t k = 0; k < params.size(); ++k)
    EXPECT_LT(finite_difference_check(loss, *params[k], grads[k]), 1e-5) << params[k]->name;
  EXPECT_LT(finite_difference_check(loss, x, dx), 1e-5);
}

TEST_P(AttentionGradients, EncoderBlockMatchesFiniteDifferences) {
  RngStream rng(GetParam() + 100);
  EncoderBlock block("enc", 8, 4, 12, rng);
  const Matrix g = testutil::random_matrix(4, 8, rng);
  Parameter x("x", 4, 8);
  x.value = testutil::random_matrix(4, 8, rng);
  auto loss = [&] { return dot(block.forward(x.value), g); };
  loss();
  const Matrix dx = block.backward(g);
  std::vector<Parameter*> params;
  block.collect(params);
  std::vector<Matrix> grads;
  for (auto* p : params) grads.push_back(p->grad);
  for (std::size_t k = 0; k < params.size(); ++k)
    EXPECT_LT(finite_difference_check(loss, *params[k], grads[k]), 1e-4) << params[k]->name;
  EXPECT_LT(finite_difference_check(loss, x, dx), 1e-4);
  EXPECT_EQ(block.predict(x.value), block.forward(x.value));
}

INSTANTIATE_TEST_SUITE_P(Seeds, AttentionGradients, ::testing::Values(1u, 2u, 3u));

class PolicyGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PolicyGradient, CompositeLossMatchesFiniteDifferences) {
  RngStream rng(GetParam());
  PolicyConfig pc;
  pc.d_model = 8;
  pc.heads = 2;
  pc.ff_width = 12;
  PolicyNet policy(4, 3, pc, rng);
  randomize(policy.parameters(), rng, 0.7);
  const std::vector<std::size_t> sizes{2, 8, 16};
  const std::vector<std::uint32_t> state{0, 2, 1, 1};
  const std::vector<std::uint32_t> action{1, 0, 2, 1};
  const double advantage = 0.37;
  PenaltyConfig cfg{0.01, 0.5, 1.0};

  const Matrix p = policy.forward(state);
  const PenaltyTerms terms = compute_penalty(p, sizes, cfg);
  Matrix d_p = terms.d_p;
  for (std::size_t i = 0; i < 4; ++i) d_p(i, action[i]) -= advantage / p(i, action[i]);
  policy.backward(softmax_backward(p, d_p));

  auto params = policy.parameters();
  std::vector<Matrix> grads;
  for (auto* q : params) grads.push_back(q->grad);
  auto loss = [&] { return composite_loss(policy.probabilities(state), action, advantage, sizes, cfg); };
  for (std::size_t k = 0; k < params.size(); ++k)
    EXPECT_LT(finite_difference_check(loss, *params[k], grads[k]), 1e-4) << params[k]->name;
}

INSTANTIATE_TEST_SUITE_P(Seeds, PolicyGradient, ::testing::Values(1u, 2u, 3u, 4u));

TEST(Penalty, UniformRowIdentities) {
  const PenaltyConfig cfg = PenaltyConfig::effect_first();
  const auto t = compute_penalty(Matrix(3, 5, 0.2), kDefaultSizes, cfg);
  EXPECT_EQ(t.competition, 0.0);
  EXPECT_NEAR(t.resource, cfg.lambda_r * 24.4, 1e-15);
}

TEST(Penalty, OneHotRowIdentities) {
  const PenaltyConfig cfg = PenaltyConfig::resource_first();
  for (std::size_t j = 0; j < 5; ++j) {
    Matrix p(4, 5);
    for (std::size_t i = 0; i < 4; ++i) p(i, j) = 1.0;
    const auto t = compute_penalty(p, kDefaultSizes, cfg);
    EXPECT_NEAR(t.resource, cfg.lambda_r * static_cast<double>(kDefaultSizes[j]), 1e-15);
    EXPECT_NEAR(t.competition, -cfg.lambda_c * std::sqrt(4.0 / 5.0), 1e-15);
    EXPECT_NEAR(t.competition, -cfg.lambda_c * 0.8944, 1e-5);
  }
}

TEST(Penalty, MassTowardLargeSizeRaisesResource) {
  const PenaltyConfig cfg = PenaltyConfig::effect_first();
  Matrix p(2, 5, 0.2);
  const double before = compute_penalty(p, kDefaultSizes, cfg).resource;
  p(1, 0) = 0.1;
  p(1, 4) = 0.3;
  EXPECT_GT(compute_penalty(p, kDefaultSizes, cfg).resource, before);
}

TEST(Penalty, GradientMatchesFiniteDifferences) {
  RngStream rng(6);
  const PenaltyConfig cfg{0.01, 0.3, 1.0};
  Parameter p("p", 3, 5);
  for (double& v : p.value.values()) v = 0.05 + rng.uniform();
  const Matrix d_p = compute_penalty(p.value, kDefaultSizes, cfg).d_p;
  auto loss = [&] { return compute_penalty(p.value, kDefaultSizes, cfg).total(); };
  EXPECT_LT(finite_difference_check(loss, p, d_p), 1e-6);
}

TEST(Penalty, PresetsAndValidation) {
  const auto e = PenaltyConfig::preset("effect");
  EXPECT_EQ(e.lambda_r, 0.0025);
  EXPECT_EQ(e.lambda_c, 0.08);
  const auto r = PenaltyConfig::preset("resource");
  EXPECT_EQ(r.lambda_r, 0.005);
  EXPECT_EQ(r.lambda_c, 0.04);
  EXPECT_THROW(PenaltyConfig::preset("balanced"), ConfigError);
  EXPECT_THROW((PenaltyConfig{-1.0, 0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((PenaltyConfig{0.0, 0.0, 0.0}.validate()), ConfigError);
}

TEST(Penalty, ExpectedParamCount) {
  const Matrix p = Matrix::from_rows({{0.5, 0.5}, {1.0, 0.0}});
  const std::vector<std::size_t> sizes{2, 8};
  const std::vector<std::uint32_t> n{100, 10};
  EXPECT_DOUBLE_EQ(expected_param_count(p, sizes, n), 100 * 5.0 + 10 * 2.0);
}

TEST(Reinforce, CenteredRewardWithoutPenaltyLeavesPolicy) {
  RngStream rng(7);
  PolicyNet policy(3, 4, PolicyConfig{}, rng);
  randomize(policy.parameters(), rng, 0.5);
  const auto before = policy.parameters();
  std::vector<Matrix> values;
  for (auto* p : before) values.push_back(p->value);
  Adam adam({.lr = 5e-4});
  const std::vector<std::uint32_t> state{0, 1, 2};
  const std::vector<std::vector<std::uint32_t>> actions{{1, 1, 3}};
  reinforce_step(policy, adam, state, actions, 0.0, std::vector<std::size_t>{2, 8, 16, 32}, {0.0, 0.0, 1.0});
  const auto after = policy.parameters();
  for (std::size_t k = 0; k < after.size(); ++k) EXPECT_EQ(after[k]->value, values[k]) << after[k]->name;
}

TEST(Reinforce, PositiveAdvantageRaisesTakenActionLogProbability) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    PolicyNet policy(3, 4, PolicyConfig{}, rng);
    randomize(policy.parameters(), rng, 0.3);
    Adam adam({.lr = 5e-4});
    const std::vector<std::uint32_t> state{0, 1, 2};
    const std::vector<std::uint32_t> a{3, 0, 2};
    auto log_prob = [&] {
      const Matrix p = policy.probabilities(state);
      double s = 0.0;
      for (std::size_t i = 0; i < 3; ++i) s += std::log(p(i, a[i]));
      return s;
    };
    const double before = log_prob();
    const std::vector<std::vector<std::uint32_t>> actions{a};
    reinforce_step(policy, adam, state, actions, 1.0, std::vector<std::size_t>{2, 8, 16, 32}, {0.0, 0.0, 1.0});
    EXPECT_GT(log_prob(), before) << "seed " << seed;
  }
}

TEST(Reinforce, CompetitionAloneDrivesEntropyDown) {
  RngStream rng(8);
  PolicyNet policy(4, 5, PolicyConfig{}, rng);
  // Start slightly off uniform: the competition norm has no gradient at the
  // uniform point itself.
  for (double& v : policy.head().bias().value.values()) v = 0.05 * rng.uniform(-1.0, 1.0);
  Adam adam({.lr = 5e-3});
  const std::vector<std::uint32_t> state{2, 2, 2, 2};
  const std::vector<std::vector<std::uint32_t>> actions{{0, 0, 0, 0}};
  double previous = mean_row_entropy(policy.probabilities(state));
  const double start = previous;
  for (int step = 0; step < 100; ++step) {
    reinforce_step(policy, adam, state, actions, 0.0, kDefaultSizes, {0.0, 1.0, 1.0});
    const double h = mean_row_entropy(policy.probabilities(state));
    EXPECT_LT(h, previous) << "step " << step;
    previous = h;
  }
  EXPECT_LT(previous, start - 0.1);
}

TEST(RunSearch, SingleCandidateTerminatesImmediately) {
  SearchConfig cfg;
  int calls = 0;
  const auto r = run_search(
      [&](std::span<const std::uint32_t>) {
        ++calls;
        return 0.5;
      },
      3, supernet::CandidateSet{{16}}, cfg, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(calls, 0);
  EXPECT_EQ(r.sizes, (std::vector<std::size_t>{16, 16, 16}));
}

TEST(RunSearch, NonFiniteRewardAborts) {
  SearchConfig cfg;
  EXPECT_THROW(run_search([](std::span<const std::uint32_t>) { return std::nan(""); }, 2,
                          supernet::CandidateSet{{2, 8}}, cfg, 1),
               NumericError);
}

TEST(RunSearch, RowsStayStochasticAndHistoryIsComplete) {
  SearchConfig cfg;
  cfg.max_steps = 60;
  cfg.samples_per_step = 2;
  const auto r = run_search([](std::span<const std::uint32_t> a) { return 0.6 + 0.01 * a[0]; }, 3,
                            supernet::CandidateSet{}, cfg, 2);
  EXPECT_EQ(r.history.size(), 60u);
  for (std::size_t i = 0; i < r.history.size(); ++i) EXPECT_EQ(r.history[i].step, i + 1);
  for (std::size_t i = 0; i < r.p.rows(); ++i) {
    double s = 0.0;
    for (double v : r.p.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_EQ(r.candidates, retrain::extract_candidates(r.p));
  const std::string csv = history_csv(r.history);
  EXPECT_EQ(csv.rfind("step,reward,baseline,penalty,resource,competition,entropy\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);
}

TEST(RunSearch, SameSeedSameResult) {
  SearchConfig cfg;
  cfg.max_steps = 40;
  auto reward = [](std::span<const std::uint32_t> a) { return 0.7 - 0.02 * a[1] + 0.01 * a[0]; };
  const auto a = run_search(reward, 3, supernet::CandidateSet{}, cfg, 9);
  const auto b = run_search(reward, 3, supernet::CandidateSet{}, cfg, 9);
  EXPECT_EQ(a.p, b.p);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) EXPECT_EQ(a.history[i].action, b.history[i].action);
}

TEST(RunSearch, ResourceFirstSpendsNoMoreThanEffectFirst) {
  // Stub reward: grows slowly with size, the way AUC does on saturating data.
  auto reward = [](std::span<const std::uint32_t> a) {
    double s = 0.0;
    for (std::uint32_t c : a) s += std::log2(static_cast<double>(kDefaultSizes[c]));
    return 0.7 + 0.004 * s / static_cast<double>(a.size());
  };
  const std::vector<std::uint32_t> n{500, 300, 50, 20};
  std::vector<double> diffs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SearchConfig effect, resource;
    effect.penalty = PenaltyConfig::effect_first();
    resource.penalty = PenaltyConfig::resource_first();
    const auto e = run_search(reward, n.size(), supernet::CandidateSet{}, effect, seed);
    const auto r = run_search(reward, n.size(), supernet::CandidateSet{}, resource, seed);
    diffs.push_back(expected_param_count(r.p, kDefaultSizes, n) - expected_param_count(e.p, kDefaultSizes, n));
  }
  std::sort(diffs.begin(), diffs.end());
  EXPECT_LE(diffs[2], 0.0);
}

TEST(Argmax, ScalingLogitsKeepsRowArgmax) {
  RngStream rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix z = testutil::random_matrix(3, 5, rng, 3.0);
    const double c = 0.1 + 5.0 * rng.uniform();
    Matrix zc = z;
    for (double& v : zc.values()) v *= c;
    EXPECT_EQ(retrain::extract_candidates(softmax_rows(z)), retrain::extract_candidates(softmax_rows(zc)));
  }
}

TEST(Evaluator, SubsampleRows) {
  EvaluatorConfig cfg;
  cfg.batches = 2;
  cfg.batch_size = 300;
  const auto all = validation_subsample(487, cfg);
  ASSERT_EQ(all.size(), 487u);
  for (std::size_t r = 0; r < all.size(); ++r) EXPECT_EQ(all[r], r);
  const auto some = validation_subsample(5000, cfg);
  EXPECT_EQ(some.size(), 600u);
  EXPECT_TRUE(std::is_sorted(some.begin(), some.end()));
  EXPECT_EQ(std::adjacent_find(some.begin(), some.end()), some.end());
  EXPECT_EQ(some, validation_subsample(5000, cfg));
  cfg.seed = 1;
  EXPECT_NE(some, validation_subsample(5000, cfg));
}

TEST(Evaluator, RandomLabelsScoreChance) {
  const auto schema = testutil::small_schema();
  auto net = supernet::Network::supernet(schema, supernet::CandidateSet{{2, 8}}, small_net(), 1);
  RngStream rng(11);
  const auto table = testutil::random_batch(schema, 10240, rng);
  data::SampleTable random_labels(schema.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    data::Sample s;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto v = table.column(i).values(r);
      s.values.emplace_back(v.begin(), v.end());
    }
    s.label = rng.bernoulli(0.5) ? 1.0 : 0.0;
    random_labels.append(s);
  }
  const SubnetEvaluator ev(net, random_labels, EvaluatorConfig{});
  EXPECT_NEAR(ev.auc(std::vector<std::uint32_t>{1, 0, 1}), 0.5, 0.03);
}

TEST(Evaluator, DeterministicAndMatchesNetworkInference) {
  const auto schema = testutil::small_schema();
  auto net = supernet::Network::supernet(schema, supernet::CandidateSet{{2, 8}}, small_net(), 2);
  sampling::Sampler sampler(sampling::SamplerConfig{}, schema, {2, 8});
  RngStream rng(12), draws(13);
  for (int i = 0; i < 20; ++i) net.train_step(testutil::random_batch(schema, 16, rng), sampler.draw(draws));
  const auto validation = testutil::random_batch(schema, 300, rng);
  const SubnetEvaluator ev(net, validation, EvaluatorConfig{});
  const std::vector<std::uint32_t> sel{1, 0, 1};
  const auto first = ev.evaluate(sel);
  EXPECT_EQ(ev.evaluate(sel).auc, first.auc);
  EXPECT_EQ(ev.evaluations(), 1u);
  const auto direct = net.predict(ev.subsample(), supernet::full_selection(sel));
  const auto cached = ev.predict(sel);
  ASSERT_EQ(direct.size(), cached.size());
  for (std::size_t r = 0; r < direct.size(); ++r) EXPECT_NEAR(direct[r], cached[r], 1e-12);
  EXPECT_THROW(ev.auc(std::vector<std::uint32_t>{2, 0, 0}), ConfigError);
  EXPECT_THROW(SubnetEvaluator(net, data::SampleTable(3), EvaluatorConfig{}), ConfigError);
}

TEST(Evaluator, LargeSizeOnInformativeFieldScoresHigher) {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    data::SyntheticSpec spec;
    spec.fields = {{"signal", 300, 1.0}, {"noise", 20, 0.0}};
    spec.samples = 20000;
    spec.seed = seed;
    spec.latent_rank = 4;
    const auto ds = data::generate_synthetic(spec);
    auto net = supernet::Network::supernet(ds.split.schema, supernet::CandidateSet{{2, 8}}, small_net(), seed);
    sampling::SamplerConfig sc;
    sc.feature_sampling = false;
    sampling::Sampler sampler(sc, ds.split.schema, {2, 8});
    supernet::SupernetTrainOptions o;
    o.epochs = 2;
    o.batch_size = 256;
    o.seed = seed;
    supernet::train_supernet(net, ds.split.train, sampler, o);
    const SubnetEvaluator ev(net, ds.split.validation, EvaluatorConfig{});
    const double big = ev.auc(std::vector<std::uint32_t>{1, 0});
    const double small = ev.auc(std::vector<std::uint32_t>{0, 0});
    wins += big >= small ? 1 : 0;
  }
  EXPECT_GE(wins, 8);
}

TEST(RunSearch, SupernetIsBitwiseUnchanged) {
  const auto schema = testutil::small_schema();
  auto net = supernet::Network::supernet(schema, supernet::CandidateSet{{2, 8}}, small_net(), 3);
  RngStream rng(14);
  const auto validation = testutil::random_batch(schema, 400, rng);
  const auto before = net.checksum();
  const SubnetEvaluator ev(net, validation, EvaluatorConfig{});
  SearchConfig cfg;
  cfg.max_steps = 30;
  run_search(ev, supernet::CandidateSet{{2, 8}}, cfg, 4);
  EXPECT_EQ(net.checksum(), before);
}

TEST(SearchConfigJson, StrictRoundTrip) {
  SearchConfig c;
  c.samples_per_step = 3;
  c.penalty = PenaltyConfig::resource_first();
  EXPECT_EQ(search_config_to_json(search_config_from_json(search_config_to_json(c))), search_config_to_json(c));
  auto j = search_config_to_json(c);
  j["mystery"] = 1;
  EXPECT_THROW(search_config_from_json(j), ConfigError);
}

TEST(SearchOutput, MatrixCsv) {
  const data::Schema schema{{"user", 3, false}, {"item", 4, false}};
  EXPECT_EQ(matrix_csv(Matrix::from_rows({{0.25, 0.75}, {1, 0}}), schema, std::vector<std::size_t>{2, 8}),
            "field,2,8\nuser,0.25,0.75\nitem,1,0\n");
}
