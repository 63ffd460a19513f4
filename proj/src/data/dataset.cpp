#include "embsizer/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embsizer/core/checkpoint.hpp"
#include "embsizer/core/error.hpp"

namespace embsizer::data {

SplitSizes split_sizes(std::size_t n, const SplitRatios& r) {
  const double total = r.train + r.validation + r.test;
  if (!(r.train > 0 && r.validation >= 0 && r.test >= 0)) throw ConfigError("bad split ratios");
  const auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r.train / total + 1e-9));
  const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r.validation / total + 1e-9));
  return {train, val, n - train - val};
}

void chronological_split(const SampleTable& all, const SplitRatios& ratios, SampleTable& train,
                         SampleTable& validation, SampleTable& test) {
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto ts = all.timestamps();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });
  const auto sizes = split_sizes(all.size(), ratios);
  std::span<const std::size_t> o(order);
  train = all.gather(o.subspan(0, sizes.train));
  validation = all.gather(o.subspan(sizes.train, sizes.validation));
  test = all.gather(o.subspan(sizes.train + sizes.validation));
}

namespace {

const char* kParts[] = {"train", "validation", "test"};

void put_table(Checkpoint& ckpt, const std::string& part, const SampleTable& t) {
  for (std::size_t f = 0; f < t.num_fields(); ++f) {
    const std::string base = part + "/f" + std::to_string(f);
    ckpt.put_u32(base + "/offsets", t.column(f).offsets());
    ckpt.put_u32(base + "/indices", t.column(f).indices());
  }
  std::vector<std::uint32_t> labels(t.labels().begin(), t.labels().end());
  ckpt.put_u32(part + "/labels", labels);
  std::vector<std::uint32_t> lo, hi;
  for (std::int64_t v : t.timestamps()) {
    const auto u = static_cast<std::uint64_t>(v);
    lo.push_back(static_cast<std::uint32_t>(u & 0xffffffffU));
    hi.push_back(static_cast<std::uint32_t>(u >> 32));
  }
  ckpt.put_u32(part + "/timestamps_lo", lo);
  ckpt.put_u32(part + "/timestamps_hi", hi);
}

SampleTable get_table(const Checkpoint& ckpt, const std::string& part, std::size_t fields) {
  std::vector<FieldColumn> cols;
  for (std::size_t f = 0; f < fields; ++f) {
    const std::string base = part + "/f" + std::to_string(f);
    cols.push_back(FieldColumn::from_csr(ckpt.get_u32(base + "/offsets"), ckpt.get_u32(base + "/indices")));
  }
  const auto raw = ckpt.get_u32(part + "/labels");
  std::vector<double> labels(raw.begin(), raw.end());
  const auto lo = ckpt.get_u32(part + "/timestamps_lo");
  const auto hi = ckpt.get_u32(part + "/timestamps_hi");
  if (lo.size() != hi.size()) throw FormatError("split cache: timestamp halves differ in length");
  std::vector<std::int64_t> ts(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i)
    ts[i] = static_cast<std::int64_t>((static_cast<std::uint64_t>(hi[i]) << 32) | lo[i]);
  return SampleTable::from_parts(std::move(cols), std::move(labels), std::move(ts));
}

}  // namespace

void write_split(const std::filesystem::path& path, const DatasetSplit& split) {
  Checkpoint ckpt;
  ckpt.meta() = {{"kind", "dataset_split"},
                 {"schema", schema_to_json(split.schema)},
                 {"schema_hash", schema_hash_hex(split.schema)},
                 {"vocabularies", split.vocabularies}};
  put_table(ckpt, kParts[0], split.train);
  put_table(ckpt, kParts[1], split.validation);
  put_table(ckpt, kParts[2], split.test);
  ckpt.save(path);
}

DatasetSplit read_split(const std::filesystem::path& path) {
  const Checkpoint ckpt = Checkpoint::load(path);
  if (ckpt.meta().value("kind", "") != "dataset_split") {
    throw FormatError(path.string() + " is not a dataset split cache");
  }
  DatasetSplit split;
  split.schema = schema_from_json(ckpt.meta().at("schema"));
  split.vocabularies = ckpt.meta().at("vocabularies").get<std::vector<std::vector<std::string>>>();
  const std::size_t m = split.schema.size();
  split.train = get_table(ckpt, kParts[0], m);
  split.validation = get_table(ckpt, kParts[1], m);
  split.test = get_table(ckpt, kParts[2], m);
  split.train.validate(split.schema);
  split.validation.validate(split.schema);
  split.test.validate(split.schema);
  return split;
}

}  // namespace embsizer::data
