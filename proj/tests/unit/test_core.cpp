#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "embsizer/core/adam.hpp"
#include "embsizer/core/checkpoint.hpp"
#include "embsizer/core/error.hpp"
#include "embsizer/core/gradcheck.hpp"
#include "embsizer/core/layers.hpp"
#include "embsizer/core/loss.hpp"
#include "embsizer/core/parameter.hpp"
#include "helpers.hpp"

using namespace embsizer;

namespace {

// sum(y .* g) for a fixed random g, so that d loss / d y = g.
double weighted_sum(const Matrix& y, const Matrix& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) s += y.data()[k] * g.data()[k];
  return s;
}

}  // namespace

TEST(Affine, IdentityWeights) {
  RngStream rng(1);
  Affine a("a", 2, 2, rng);
  a.weight().value = Matrix::from_rows({{1, 0}, {0, 1}});
  a.bias().value = Matrix::from_rows({{0, 0}});
  EXPECT_EQ(a.predict(Matrix::from_rows({{1, 2}})), Matrix::from_rows({{1, 2}}));
}

TEST(Affine, HandMultiply) {
  RngStream rng(1);
  Affine a("a", 2, 2, rng);
  a.weight().value = Matrix::from_rows({{2, 3}, {4, 5}});
  a.bias().value = Matrix::from_rows({{1, 1}});
  // [1 1] * [[2 3] [4 5]] + [1 1] = [2+4+1, 3+5+1]
  EXPECT_EQ(a.predict(Matrix::from_rows({{1, 1}})), Matrix::from_rows({{7, 9}}));
}

TEST(Affine, EmptyBatch) {
  RngStream rng(1);
  Affine a("a", 3, 4, rng);
  const Matrix y = a.predict(Matrix(0, 3));
  EXPECT_EQ(y.rows(), 0u);
  EXPECT_EQ(y.cols(), 4u);
}

TEST(Affine, WidthMismatchThrows) {
  RngStream rng(1);
  Affine a("a", 3, 4, rng);
  EXPECT_THROW(a.predict(Matrix(2, 2)), ConfigError);
}

TEST(Activations, Basics) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(relu(Matrix::from_rows({{-1, 2}})), Matrix::from_rows({{0, 2}}));
  const Matrix s = softmax_rows(Matrix(1, 5, 3.25));
  for (double v : s.values()) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Activations, SigmoidExtremesStayFinite) {
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_NEAR(sigmoid(-2.0), 1.0 / (1.0 + std::exp(2.0)), 1e-15);
}

TEST(Activations, SoftmaxRowsAreDistributions) {
  RngStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = testutil::random_matrix(4, 6, rng, 20.0);
    const Matrix p = softmax_rows(x);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double total = 0.0;
      for (double v : p.row(i)) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Activations, SoftmaxRejectsNonFinite) {
  Matrix x(1, 2);
  x(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(softmax_rows(x), NumericError);
}

TEST(BatchNormLayer, TwoPointStandardization) {
  BatchNorm bn("bn", 1);
  const Matrix y = bn.forward(Matrix::from_rows({{1}, {3}}), Mode::Train);
  EXPECT_NEAR(y(0, 0), -1.0, 1e-5);
  EXPECT_NEAR(y(1, 0), 1.0, 1e-5);
}

TEST(BatchNormLayer, InferenceWithUnitStatsIsIdentity) {
  BatchNorm bn("bn", 3);
  const Matrix x = Matrix::from_rows({{0.5, -2, 7}, {1, 1, 1}});
  const Matrix y = bn.forward(x, Mode::Inference);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(y.data()[k], x.data()[k], 1e-5 * std::abs(x.data()[k]));
}

TEST(BatchNormLayer, ConstantColumnGivesZeros) {
  BatchNorm bn("bn", 1);
  const Matrix y = bn.forward(Matrix::from_rows({{4}, {4}, {4}}), Mode::Train);
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(BatchNormLayer, SingleRowTrainBatchThrows) {
  BatchNorm bn("bn", 2);
  EXPECT_THROW(bn.forward(Matrix(1, 2), Mode::Train), ConfigError);
}

TEST(BatchNormLayer, RunningStatisticsFollowMomentum) {
  BatchNorm bn("bn", 1);
  bn.forward(Matrix::from_rows({{1}, {3}}), Mode::Train);
  EXPECT_NEAR(bn.running_mean()(0, 0), 0.1 * 2.0, 1e-12);
  EXPECT_NEAR(bn.running_var()(0, 0), 0.9 * 1.0 + 0.1 * 1.0, 1e-12);
}

TEST(CrossEntropy, Values) {
  EXPECT_NEAR(cross_entropy(0.5, 1.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(cross_entropy(1.0 - 1e-7, 1.0), 1e-7, 1e-9);
  const double mean = 0.5 * (cross_entropy(0.9, 1.0) + cross_entropy(0.1, 0.0));
  EXPECT_NEAR(mean, -std::log(0.9), 1e-12);
  EXPECT_NEAR(mean, 0.1054, 1e-4);
}

TEST(CrossEntropy, RejectsBadLabel) { EXPECT_THROW(cross_entropy(0.5, 0.5), DataError); }

TEST(CrossEntropy, LogitFormMatchesProbabilityForm) {
  const std::vector<double> logits{-1.5, 0.0, 2.0};
  const std::vector<double> labels{0.0, 1.0, 1.0};
  const auto out = binary_cross_entropy_with_logits(logits, labels);
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i) expected += cross_entropy(sigmoid(logits[i]), labels[i]) / 3.0;
  EXPECT_NEAR(out.loss, expected, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out.d_logits[i], (sigmoid(logits[i]) - labels[i]) / 3.0, 1e-15);
}

TEST(CrossEntropy, NonFiniteLogitThrows) {
  const std::vector<double> logits{std::numeric_limits<double>::infinity()};
  const std::vector<double> labels{1.0};
  EXPECT_THROW(binary_cross_entropy_with_logits(logits, labels), NumericError);
}

TEST(AdamStep, ZeroGradientLeavesValue) {
  Parameter p("p", 2, 2);
  p.value = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix before = p.value;
  p.touch_all();
  Parameter* params[] = {&p};
  Adam(AdamConfig{0.1}).step(params);
  EXPECT_EQ(p.value, before);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
  Parameter p("p", 1, 1);
  p.value(0, 0) = 0.5;
  p.grad(0, 0) = 1.0;
  p.touch_all();
  Parameter* params[] = {&p};
  Adam(AdamConfig{0.01}).step(params);
  // m_hat = g, v_hat = g^2 at t = 1, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(p.value(0, 0), 0.5 - 0.01 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(p.grad(0, 0), 0.0);
  EXPECT_EQ(p.steps, 1u);
}

TEST(AdamStep, UntouchedRowsAndColumnsStayPut) {
  Parameter p("p", 4, 3);
  RngStream rng(2);
  p.init_uniform(rng, 1.0);
  const Matrix before = p.value;
  const std::uint32_t rows[] = {2};
  p.grad(2, 0) = 1.0;
  p.grad(2, 1) = -1.0;
  p.touch_rows(rows, 2);
  Parameter* params[] = {&p};
  Adam(AdamConfig{0.1}).step(params);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      if (r == 2 && c < 2) EXPECT_NE(p.value(r, c), before(r, c));
      else EXPECT_EQ(p.value(r, c), before(r, c));
    }
}

TEST(AdamStep, NonFiniteUpdateThrows) {
  Parameter p("p", 1, 1);
  p.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  p.touch_all();
  Parameter* params[] = {&p};
  EXPECT_THROW(Adam().step(params), NumericError);
}

TEST(AdamStep, DeterministicAcrossRuns) {
  auto run = [] {
    RngStream rng(9);
    Parameter p("p", 3, 3);
    p.init_uniform(rng, 1.0);
    Parameter* params[] = {&p};
    for (int t = 0; t < 20; ++t) {
      for (double& g : p.grad.values()) g = rng.normal();
      p.touch_all();
      Adam(AdamConfig{0.05}).step(params);
    }
    return p.value;
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamStep, F32ModeRoundsToFloat) {
  Parameter p("p", 1, 3);
  p.value = Matrix::from_rows({{0.1, 0.2, 0.3}});
  for (double& g : p.grad.values()) g = 0.123456789;
  p.touch_all();
  Parameter* params[] = {&p};
  AdamConfig cfg;
  cfg.precision = Precision::F32;
  Adam(cfg).step(params);
  for (double v : p.value.values()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}

TEST(GradCheck, QuadraticIsExact) {
  Parameter w("w", 1, 1);
  w.value(0, 0) = 3.0;
  const Matrix analytic = Matrix::from_rows({{6.0}});
  const double err = finite_difference_check([&] { return w.value(0, 0) * w.value(0, 0); }, w, analytic);
  EXPECT_LT(err, 1e-8);
  EXPECT_EQ(w.value(0, 0), 3.0);
}

TEST(GradCheck, CorruptedGradientIsFlagged) {
  Parameter w("w", 1, 1);
  w.value(0, 0) = 3.0;
  const Matrix doubled = Matrix::from_rows({{12.0}});
  const double err = finite_difference_check([&] { return w.value(0, 0) * w.value(0, 0); }, w, doubled);
  EXPECT_NEAR(err, 0.5, 1e-6);
}

class LayerGradients : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LayerGradients, Affine) {
  RngStream rng(GetParam());
  const std::size_t n = 1 + rng.uniform_int(8), in = 1 + rng.uniform_int(16), out = 1 + rng.uniform_int(16);
  Affine layer("l", in, out, rng);
  Parameter x("x", n, in);
  x.value = testutil::random_matrix(n, in, rng);
  const Matrix g = testutil::random_matrix(n, out, rng);
  layer.forward(x.value);
  const Matrix dx = layer.backward(g);
  auto loss = [&] { return weighted_sum(layer.predict(x.value), g); };
  EXPECT_LT(finite_difference_check(loss, x, dx), 1e-4);
  EXPECT_LT(finite_difference_check(loss, layer.weight(), layer.weight().grad), 1e-4);
  EXPECT_LT(finite_difference_check(loss, layer.bias(), layer.bias().grad), 1e-4);
}

TEST_P(LayerGradients, Relu) {
  RngStream rng(GetParam());
  Parameter x("x", 5, 7);
  x.value = testutil::random_matrix(5, 7, rng);
  // Keep inputs away from the kink.
  for (double& v : x.value.values())
    if (std::abs(v) < 0.05) v = 0.3;
  const Matrix g = testutil::random_matrix(5, 7, rng);
  Relu r;
  r.forward(x.value);
  const Matrix dx = r.backward(g);
  EXPECT_LT(finite_difference_check([&] { return weighted_sum(relu(x.value), g); }, x, dx), 1e-4);
}

TEST_P(LayerGradients, BatchNormTrainMode) {
  RngStream rng(GetParam());
  const std::size_t n = 2 + rng.uniform_int(7), d = 1 + rng.uniform_int(16);
  BatchNorm bn("bn", d);
  for (double& v : bn.gamma().value.values()) v = rng.uniform(0.5, 1.5);
  for (double& v : bn.beta().value.values()) v = rng.uniform(-0.5, 0.5);
  Parameter x("x", n, d);
  x.value = testutil::random_matrix(n, d, rng);
  const Matrix g = testutil::random_matrix(n, d, rng);
  bn.forward(x.value, Mode::Train);
  const Matrix dx = bn.backward(g);
  auto loss = [&] {
    BatchNorm copy = bn;
    return weighted_sum(copy.forward(x.value, Mode::Train), g);
  };
  EXPECT_LT(finite_difference_check(loss, x, dx), 1e-4);
  EXPECT_LT(finite_difference_check(loss, bn.gamma(), bn.gamma().grad), 1e-4);
  EXPECT_LT(finite_difference_check(loss, bn.beta(), bn.beta().grad), 1e-4);
}

TEST_P(LayerGradients, LayerNorm) {
  RngStream rng(GetParam());
  const std::size_t n = 1 + rng.uniform_int(8), d = 2 + rng.uniform_int(15);
  LayerNorm ln("ln", d);
  for (double& v : ln.gamma().value.values()) v = rng.uniform(0.5, 1.5);
  Parameter x("x", n, d);
  x.value = testutil::random_matrix(n, d, rng);
  const Matrix g = testutil::random_matrix(n, d, rng);
  ln.forward(x.value);
  const Matrix dx = ln.backward(g);
  auto loss = [&] { return weighted_sum(ln.predict(x.value), g); };
  EXPECT_LT(finite_difference_check(loss, x, dx), 1e-4);
  EXPECT_LT(finite_difference_check(loss, ln.gamma(), ln.gamma().grad), 1e-4);
  EXPECT_LT(finite_difference_check(loss, ln.beta(), ln.beta().grad), 1e-4);
}

TEST_P(LayerGradients, LogisticLoss) {
  RngStream rng(GetParam());
  Parameter z("z", 1, 8);
  z.value = testutil::random_matrix(1, 8, rng, 3.0);
  std::vector<double> labels(8);
  for (std::size_t i = 0; i < 8; ++i) labels[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const auto out = binary_cross_entropy_with_logits(z.value.row(0), labels);
  Matrix analytic(1, 8);
  for (std::size_t i = 0; i < 8; ++i) analytic(0, i) = out.d_logits[i];
  auto loss = [&] { return binary_cross_entropy_with_logits(z.value.row(0), labels).loss; };
  EXPECT_LT(finite_difference_check(loss, z, analytic), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, LayerGradients, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Rng, SameSeedSameStream) {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, ForksAreIndependentOfParentDraws) {
  RngStream a(5);
  const RngStream fa = a.fork(3);
  a.next_u64();
  RngStream b(5);
  RngStream fb = b.fork(3);
  RngStream fa_copy = fa;
  EXPECT_EQ(fa_copy.next_u64(), fb.next_u64());
}

TEST(Rng, CategoricalFollowsWeights) {
  RngStream rng(11);
  const std::vector<double> w{1.0, 3.0};
  int ones = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) ones += static_cast<int>(rng.categorical(w));
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.75, 0.01);
}

TEST(Rng, RoleSeedsDiffer) {
  EXPECT_NE(role_seed(1, SeedRole::Init), role_seed(1, SeedRole::Shuffle));
  EXPECT_NE(role_seed(1, SeedRole::Init), role_seed(2, SeedRole::Init));
}

TEST(CheckpointContainer, RoundTripIsBitExactForFloats) {
  testutil::TempDir dir("ckpt");
  RngStream rng(4);
  Matrix m = testutil::random_matrix(3, 5, rng);
  round_to_float(m);
  Checkpoint c;
  c.meta()["kind"] = "test";
  c.put("m", m);
  const std::vector<std::uint32_t> idx{1, 2, 4000000000u};
  c.put_u32("idx", idx);
  c.save(dir / "c.bin");
  const Checkpoint back = Checkpoint::load(dir / "c.bin");
  EXPECT_EQ(back.meta().at("kind"), "test");
  EXPECT_EQ(back.get("m"), m);
  EXPECT_EQ(back.get_u32("idx"), idx);
}

TEST(CheckpointContainer, FloatRecordsAreFourBytesAndDoublesSurvive) {
  Matrix f(4, 4, 0.5);
  Checkpoint a;
  a.put("m", f);
  Matrix d = f;
  d(1, 2) = 0.1;
  Checkpoint b;
  b.put("m", d);
  const auto fa = a.serialize(), fb = b.serialize();
  EXPECT_EQ(fb.size() - fa.size(), 16u * 4u);
  EXPECT_EQ(fa[fa.size() - 16 * 4 - 9], 0u);
  EXPECT_EQ(fb[fb.size() - 16 * 8 - 9], 2u);
  EXPECT_EQ(Checkpoint::deserialize(fb).get("m"), d);
  EXPECT_EQ(Checkpoint::deserialize(fa).get("m"), f);
}

TEST(CheckpointContainer, CorruptInputsRaiseFormatError) {
  Checkpoint c;
  c.put("m", Matrix(2, 2, 1.0));
  auto bytes = c.serialize();
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(Checkpoint::deserialize(bad_magic), FormatError);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(Checkpoint::deserialize(bytes), FormatError);
  EXPECT_THROW(c.get("missing"), FormatError);
  EXPECT_THROW(c.get_u32("m"), FormatError);
}

TEST(ParameterChecksum, SensitiveToValues) {
  Parameter p("p", 2, 2);
  const Parameter* ps[] = {&p};
  const auto before = checksum(ps);
  p.value(1, 1) = 1e-9;
  EXPECT_NE(checksum(ps), before);
}

TEST(CrossEntropy, LogitFormIsAccurateForLargeLogits) {
  // log1p(exp(-|z|)) keeps full precision where 1 - sigmoid(z) would not.
  for (double z : {12.0, 20.0, 40.0}) {
    const std::vector<double> logits{z, -z};
    const std::vector<double> labels{0.0, 1.0};
    const auto out = binary_cross_entropy_with_logits(logits, labels);
    const double exact = z + std::log1p(std::exp(-z));
    EXPECT_NEAR(out.loss, exact, 1e-14 * exact);
  }
}
