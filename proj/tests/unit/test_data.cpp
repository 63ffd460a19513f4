#include <algorithm>
#include <ctime>
#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "embsizer/analysis/metrics.hpp"
#include "embsizer/core/error.hpp"
#include "embsizer/data/csv_loader.hpp"
#include "embsizer/data/dataset.hpp"
#include "embsizer/data/movielens.hpp"
#include "embsizer/data/preprocess.hpp"
#include "embsizer/data/synthetic.hpp"
#include "helpers.hpp"

using namespace embsizer;
using namespace embsizer::data;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

CsvConfig two_field_config() {
  CsvConfig c;
  c.label_column = "label";
  c.timestamp_column = "ts";
  c.fields = {{"cat", false, false, 32}, {"tags", true, false, 32}};
  return c;
}

}  // namespace

TEST(CsvLoader, TenRowsSplitEightOneOne) {
  testutil::TempDir dir("csv");
  std::string text = "ts,cat,tags,label\n";
  for (int i = 0; i < 10; ++i) text += std::to_string(i) + ",c" + std::to_string(i % 3) + ",a|b," + std::to_string(i % 2) + "\n";
  write_file(dir / "d.csv", text);
  const auto split = load_csv(dir / "d.csv", two_field_config());
  EXPECT_EQ(split.train.size(), 8u);
  EXPECT_EQ(split.validation.size(), 1u);
  EXPECT_EQ(split.test.size(), 1u);
  EXPECT_EQ(split.train.column(1).values(0).size(), 2u);
  EXPECT_TRUE(split.schema[1].multi_valued);
}

TEST(CsvLoader, UnseenValueMapsToOov) {
  testutil::TempDir dir("csv");
  std::string text = "ts,cat,tags,label\n";
  for (int i = 0; i < 9; ++i) text += std::to_string(i) + ",seen,x," + std::to_string(i % 2) + "\n";
  text += "9,fresh,y|x,1\n";
  write_file(dir / "d.csv", text);
  const auto split = load_csv(dir / "d.csv", two_field_config());
  ASSERT_EQ(split.test.size(), 1u);
  EXPECT_EQ(split.test.column(0).values(0)[0], 0u);
  const auto tags = split.test.column(1).values(0);
  EXPECT_EQ(tags[0], 0u);
  EXPECT_NE(tags[1], 0u);
  // Vocabulary comes from training rows only: <oov> plus "seen".
  EXPECT_EQ(split.schema[0].cardinality, 2u);
  EXPECT_EQ(split.vocabularies[0], (std::vector<std::string>{"<oov>", "seen"}));
}

TEST(CsvLoader, ChronologicalOrderAcrossSplits) {
  testutil::TempDir dir("csv");
  RngStream rng(3);
  std::string text = "ts,cat,tags,label\n";
  for (int i = 0; i < 200; ++i) text += std::to_string(rng.uniform_int(50)) + ",c" + std::to_string(i % 7) + ",t,1\n";
  write_file(dir / "d.csv", text);
  const auto split = load_csv(dir / "d.csv", two_field_config());
  const auto max_of = [](const SampleTable& t) { return *std::max_element(t.timestamps().begin(), t.timestamps().end()); };
  const auto min_of = [](const SampleTable& t) { return *std::min_element(t.timestamps().begin(), t.timestamps().end()); };
  EXPECT_LE(max_of(split.train), min_of(split.validation));
  EXPECT_LE(max_of(split.validation), min_of(split.test));
}

TEST(CsvLoader, BadInputsRaiseDataError) {
  testutil::TempDir dir("csv");
  write_file(dir / "label.csv", "ts,cat,tags,label\n1,a,b,2\n");
  EXPECT_THROW(load_csv(dir / "label.csv", two_field_config()), DataError);
  write_file(dir / "short.csv", "ts,cat,tags,label\n1,a,1\n");
  EXPECT_THROW(load_csv(dir / "short.csv", two_field_config()), DataError);
  write_file(dir / "col.csv", "ts,cat,label\n1,a,1\n");
  EXPECT_THROW(load_csv(dir / "col.csv", two_field_config()), DataError);
  EXPECT_THROW(load_csv(dir / "missing.csv", two_field_config()), DataError);
}

TEST(CsvLoader, NumericColumnsAreBucketized) {
  testutil::TempDir dir("csv");
  std::string text = "x,label\n";
  for (int i = 0; i < 100; ++i) text += std::to_string(i) + "," + std::to_string(i % 2) + "\n";
  text += ",0\n";
  write_file(dir / "n.csv", text);
  CsvConfig c;
  c.label_column = "label";
  c.fields = {{"x", false, true, 4}};
  const auto split = load_csv(dir / "n.csv", c);
  EXPECT_EQ(split.schema[0].cardinality, 5u);  // missing slot + 4 buckets
  EXPECT_EQ(split.test.column(0).values(split.test.size() - 1)[0], 0u);
}

TEST(CsvLoader, WriteThenLoadPreservesRows) {
  testutil::TempDir dir("csv");
  std::string text = "ts,cat,tags,label\n";
  for (int i = 0; i < 30; ++i) text += std::to_string(i) + ",c" + std::to_string(i % 4) + ",a|b," + std::to_string(i % 2) + "\n";
  write_file(dir / "d.csv", text);
  const auto split = load_csv(dir / "d.csv", two_field_config());
  const auto config = write_csv(dir / "out.csv", split);
  const auto back = load_csv(dir / "out.csv", config);
  EXPECT_EQ(back.train, split.train);
  EXPECT_EQ(back.test.labels().size(), split.test.labels().size());
}

TEST(MovieLens, Labelize) {
  EXPECT_EQ(mlens_labelize(4), 1);
  EXPECT_EQ(mlens_labelize(5), 1);
  EXPECT_EQ(mlens_labelize(3), 0);
  EXPECT_EQ(mlens_labelize(1), 0);
  EXPECT_THROW(mlens_labelize(0), DataError);
  EXPECT_THROW(mlens_labelize(6), DataError);
}

TEST(MovieLens, TimestampCalendarPoints) {
  // 2000-01-01 00:00:00 UTC was a Saturday.
  const std::int64_t sat = 946684800;
  EXPECT_EQ(timestamp_expand(sat + 13 * 3600), (TimeFeatures{1, 13}));
  EXPECT_EQ(timestamp_expand(sat + 4 * 86400), (TimeFeatures{0, 0}));
}

TEST(MovieLens, TimestampAgreesWithGmtime) {
  RngStream rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::time_t t = static_cast<std::time_t>(rng.uniform_int(2000000000));
    std::tm tm{};
    gmtime_r(&t, &tm);
    const auto f = timestamp_expand(t);
    EXPECT_EQ(f.hour_in_day, tm.tm_hour);
    EXPECT_EQ(f.weekend, tm.tm_wday == 0 || tm.tm_wday == 6 ? 1 : 0);
    const auto g = timestamp_expand(t + 3600);
    EXPECT_EQ(g.hour_in_day, (f.hour_in_day + 1) % 24);
  }
}

TEST(MovieLens, ConvertTinyDistribution) {
  testutil::TempDir dir("ml");
  write_file(dir / "users.dat", "1::F::1::10::48067\n2::M::56::16::70072\n");
  write_file(dir / "movies.dat", "10::Toy Story (1995)::Animation|Children's\n20::Heat (1995)::Action\n");
  std::string ratings;
  for (int i = 0; i < 20; ++i)
    ratings += std::to_string(1 + i % 2) + "::" + (i % 3 ? "10" : "20") + "::" + std::to_string(1 + i % 5) +
               "::" + std::to_string(978300000 + 60 * i) + "\n";
  write_file(dir / "ratings.dat", ratings);
  const auto config = convert_movielens(dir.path(), dir / "ml.csv");
  const auto split = load_csv(dir / "ml.csv", config);
  EXPECT_EQ(split.schema.size(), 10u);
  EXPECT_EQ(split.train.size() + split.validation.size() + split.test.size(), 20u);
  const auto genres = std::find_if(split.schema.begin(), split.schema.end(), [](const auto& f) { return f.name == "genres"; });
  ASSERT_NE(genres, split.schema.end());
  EXPECT_TRUE(genres->multi_valued);
  for (double y : split.train.labels()) EXPECT_TRUE(y == 0.0 || y == 1.0);
}

TEST(Bucketizer, ClampsAndIsMonotone) {
  std::vector<double> train;
  for (int i = 0; i < 1000; ++i) train.push_back(i);
  const auto b = QuantileBucketizer::fit(train, 4);
  EXPECT_EQ(b.bucket(-50.0), 0u);
  EXPECT_EQ(b.bucket(1e9), 3u);
  RngStream rng(2);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(-100, 1100), c = rng.uniform(-100, 1100);
    EXPECT_LE(b.bucket(std::min(a, c)), b.bucket(std::max(a, c)));
  }
}

TEST(Bucketizer, QuartersOfUniformMass) {
  RngStream rng(5);
  std::vector<double> train;
  for (int i = 0; i < 20000; ++i) train.push_back(rng.uniform());
  const auto b = QuantileBucketizer::fit(train, 4);
  std::vector<int> counts(4, 0);
  for (double v : train) ++counts[b.bucket(v)];
  for (int c : counts) EXPECT_NEAR(c / 20000.0, 0.25, 0.005);
}

TEST(Split, SizesFollowRatios) {
  const auto s = split_sizes(10, {});
  EXPECT_EQ(s.train, 8u);
  EXPECT_EQ(s.validation, 1u);
  EXPECT_EQ(s.test, 1u);
  const auto t = split_sizes(1003, {});
  EXPECT_EQ(t.train + t.validation + t.test, 1003u);
}

TEST(Split, CacheRoundTrip) {
  testutil::TempDir dir("split");
  SyntheticSpec spec;
  spec.fields = {{"a", 20, 1.0}, {"b", 7, 0.5}};
  spec.samples = 500;
  const auto ds = generate_synthetic(spec);
  write_split(dir / "s.bin", ds.split);
  const auto back = read_split(dir / "s.bin");
  EXPECT_EQ(back.schema, ds.split.schema);
  EXPECT_EQ(back.train, ds.split.train);
  EXPECT_EQ(back.validation, ds.split.validation);
  EXPECT_EQ(back.test, ds.split.test);
}

TEST(Schema, ValidationAndHash) {
  EXPECT_THROW(validate_schema({{"a", 0, false}}), ConfigError);
  EXPECT_THROW(validate_schema({{"a", 2, false}, {"a", 3, false}}), ConfigError);
  const Schema s{{"a", 2, false}, {"b", 3, true}};
  Schema t = s;
  EXPECT_EQ(schema_hash(s), schema_hash(t));
  t[1].cardinality = 4;
  EXPECT_NE(schema_hash(s), schema_hash(t));
  EXPECT_EQ(schema_from_json(schema_to_json(s)), s);
}

TEST(SampleTableTest, ValidateAgainstSchema) {
  const Schema schema{{"a", 3, false}};
  SampleTable t(1);
  t.append({{{5}}, 1.0, 0});
  EXPECT_THROW(t.validate(schema), DataError);
  SampleTable u(1);
  u.append({{{0, 1}}, 1.0, 0});
  EXPECT_THROW(u.validate(schema), DataError);
}

TEST(Synthetic, SameSeedSameData) {
  SyntheticSpec spec;
  spec.fields = {{"a", 30, 1.0}, {"b", 10, 0.0}};
  spec.samples = 2000;
  spec.popularity_skew = 1.0;
  const auto x = generate_synthetic(spec);
  const auto y = generate_synthetic(spec);
  EXPECT_EQ(x.split.train, y.split.train);
  EXPECT_EQ(x.split.test, y.split.test);
  spec.seed = 2;
  EXPECT_NE(generate_synthetic(spec).split.train, x.split.train);
}

TEST(Synthetic, UninformativeFieldsGiveChance) {
  SyntheticSpec spec;
  spec.fields = {{"a", 20, 0.0}, {"b", 20, 0.0}};
  spec.samples = 50000;
  spec.base_rate = 0.3;
  const auto ds = generate_synthetic(spec);
  double rate = 0.0;
  for (double y : ds.split.train.labels()) rate += y;
  rate /= static_cast<double>(ds.split.train.size());
  EXPECT_NEAR(rate, 0.3, 0.01);
  // Best possible per-value model fitted on train, scored on test.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<double, double>> stats;
  for (std::size_t r = 0; r < ds.split.train.size(); ++r) {
    auto& s = stats[{ds.split.train.column(0).values(r)[0], ds.split.train.column(1).values(r)[0]}];
    s.first += ds.split.train.labels()[r];
    s.second += 1.0;
  }
  std::vector<double> scores;
  for (std::size_t r = 0; r < ds.split.test.size(); ++r) {
    const auto& s = stats[{ds.split.test.column(0).values(r)[0], ds.split.test.column(1).values(r)[0]}];
    scores.push_back(s.second > 0 ? s.first / s.second : rate);
  }
  EXPECT_NEAR(analysis::auc(scores, ds.split.test.labels()), 0.5, 0.02);
}

TEST(Synthetic, BinaryFieldBayesAucAboveEightTenths) {
  SyntheticSpec spec;
  spec.fields = {{"a", 2, 1.0}};
  spec.samples = 20000;
  const auto ds = generate_synthetic(spec);
  // Two values with logits +-m; P(y=1 | +) = s = sigmoid(m). With balanced
  // values the Bayes AUC is s^2 + s(1 - s).
  const double m = spec.main_scale * std::sqrt(3.0) * 0.5;
  const double s = 1.0 / (1.0 + std::exp(-m));
  const double oracle = s * s + s * (1.0 - s);
  EXPECT_GT(oracle, 0.8);
  std::vector<double> scores;
  for (std::size_t r = 0; r < ds.split.test.size(); ++r) scores.push_back(ds.truth.logit(ds.split.test.sample(r)));
  EXPECT_NEAR(analysis::auc(scores, ds.split.test.labels()), oracle, 0.02);
}

TEST(Synthetic, SkewConcentratesValues) {
  SyntheticSpec spec;
  spec.fields = {{"a", 100, 1.0}};
  spec.samples = 20000;
  spec.popularity_skew = 1.0;
  const auto ds = generate_synthetic(spec);
  std::vector<int> counts(100, 0);
  for (std::size_t r = 0; r < ds.split.train.size(); ++r) ++counts[ds.split.train.column(0).values(r)[0]];
  std::sort(counts.rbegin(), counts.rend());
  // Harmonic weights: the top value takes 1 / H_100 (about 19%) of the mass.
  double h = 0.0;
  for (int k = 1; k <= 100; ++k) h += 1.0 / k;
  EXPECT_NEAR(counts[0] / static_cast<double>(ds.split.train.size()), 1.0 / h, 0.015);
}

TEST(Synthetic, RejectsBadSpecs) {
  SyntheticSpec spec;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  spec.fields = {{"a", 2, 1.5}};
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  spec.fields = {{"a", 2, 1.0}};
  spec.popularity_skew = -1.0;
  EXPECT_THROW(generate_synthetic(spec), ConfigError);
  EXPECT_THROW(synthetic_spec_from_json(nlohmann::json::parse(R"({"samples": 10})")), ConfigError);
}
