#include "embsizer/retrain/retrain.hpp"

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/supernet/candidates.hpp"

namespace embsizer::retrain {

SizeAssignment make_assignment(const data::Schema& schema, std::vector<std::size_t> sizes) {
  if (sizes.size() != schema.size()) throw ConfigError("assignment needs one size per field");
  SizeAssignment a;
  for (const auto& f : schema) a.fields.push_back(f.name);
  a.sizes = std::move(sizes);
  a.schema_hash = data::schema_hash_hex(schema);
  return a;
}

nlohmann::json assignment_to_json(const SizeAssignment& a) {
  nlohmann::json sizes = nlohmann::json::object();
  for (std::size_t i = 0; i < a.fields.size(); ++i) sizes[a.fields[i]] = a.sizes[i];
  return {{"schema_hash", a.schema_hash}, {"order", a.fields}, {"sizes", sizes}};
}

SizeAssignment assignment_from_json(const nlohmann::json& j) {
  try {
    SizeAssignment a;
    a.schema_hash = j.at("schema_hash").get<std::string>();
    a.fields = j.at("order").get<std::vector<std::string>>();
    for (const auto& f : a.fields) a.sizes.push_back(j.at("sizes").at(f).get<std::size_t>());
    for (std::size_t s : a.sizes)
      if (s == 0) throw FormatError("assignment sizes must be >= 1");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed assignment JSON: ") + e.what());
  }
}

void check_assignment(const SizeAssignment& a, const data::Schema& schema) {
  if (a.schema_hash != data::schema_hash_hex(schema)) {
    throw FormatError("assignment schema hash " + a.schema_hash + " does not match dataset " +
                      data::schema_hash_hex(schema));
  }
  if (a.fields.size() != schema.size()) throw FormatError("assignment field count differs from the schema");
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (a.fields[i] != schema[i].name) throw FormatError("assignment field order differs from the schema");
}

std::vector<std::uint32_t> extract_candidates(const Matrix& p) {
  std::vector<std::uint32_t> out(p.rows(), 0);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = p.row(i);
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[out[i]]) out[i] = static_cast<std::uint32_t>(j);
  }
  return out;
}

SizeAssignment extract_assignment(const Matrix& p, const supernet::CandidateSet& candidates,
                                  const data::Schema& schema) {
  if (p.cols() != candidates.count() || p.rows() != schema.size()) throw ConfigError("extract: P shape mismatch");
  std::vector<std::size_t> sizes;
  for (std::uint32_t c : extract_candidates(p)) sizes.push_back(candidates.sizes[c]);
  return make_assignment(schema, std::move(sizes));
}

std::uint64_t flops_estimate(const data::Schema& schema, std::span<const std::size_t> sizes,
                             const dlrm::ModelConfig& model, std::size_t transform_depth,
                             std::span<const double> avg_multi) {
  if (sizes.size() != schema.size()) throw ConfigError("flops: one size per field required");
  if (!avg_multi.empty() && avg_multi.size() != schema.size()) throw ConfigError("flops: list lengths per field");
  const std::uint64_t m = schema.size();
  const std::uint64_t d_f = model.d_f;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].multi_valued && !avg_multi.empty() && avg_multi[i] > 1.0) {
      total += static_cast<std::uint64_t>(std::llround((avg_multi[i] - 1.0) * static_cast<double>(sizes[i])));
    }
    total += sizes[i] * d_f;
    if (transform_depth > 1) total += (transform_depth - 1) * d_f * d_f;
  }
  std::uint64_t in = m * d_f;
  for (std::size_t h : model.hidden) {
    total += in * h;
    in = h;
  }
  if (model.architecture == dlrm::Architecture::DeepFM && model.fm_term) total += m * (m - 1) / 2 * d_f;
  return total;
}

std::uint64_t retrain_init_seed(std::uint64_t seed) {
  return mix_seed(role_seed(seed, SeedRole::Init), 0x72657472u);
}

RetrainResult retrain(const data::DatasetSplit& split, std::span<const std::size_t> sizes,
                      const supernet::NetworkConfig& config, const RetrainOptions& options,
                      const InheritFrom& inherit) {
  if (options.epochs == 0) throw ConfigError("retrain needs at least one epoch");
  RetrainResult result;
  result.p_r = supernet::parameter_reduction(split.schema, sizes);
  result.flops = flops_estimate(split.schema, sizes, config.model, config.transform.depth);

  auto net = supernet::Network::fixed(split.schema, {sizes.begin(), sizes.end()}, config,
                                      retrain_init_seed(options.seed));
  if (inherit.source != nullptr) net.inherit_from(*inherit.source, inherit.candidates);

  const auto selection = supernet::full_selection(std::vector<std::uint32_t>(split.schema.size(), 0));
  dlrm::EpochOptions epoch_options;
  epoch_options.batch_size = options.batch_size;
  epoch_options.shuffle_seed = role_seed(options.seed, SeedRole::Shuffle);
  auto predict = [&](const data::SampleTable& t) { return net.predict(t, selection); };

  double best_auc = -1.0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    auto losses = dlrm::run_epoch([&](const data::SampleTable& b) { return net.train_step(b, selection).loss; },
                                  split.train, epoch, epoch_options);
    result.losses.insert(result.losses.end(), losses.begin(), losses.end());
    const auto val = dlrm::evaluate(predict, split.validation, options.eval_batch);
    result.records.push_back({epoch + 1, "validation", val});
    if (!options.early_stopping || val.auc > best_auc) {
      best_auc = val.auc;
      result.best_epoch = epoch + 1;
      result.validation = val;
      result.model = net;
      if (options.evaluate_test) {
        result.test = dlrm::evaluate(predict, split.test, options.eval_batch);
        result.records.push_back({epoch + 1, "test", result.test});
      }
    }
  }
  return result;
}

nlohmann::json report_json(const SizeAssignment& a, const RetrainResult& r, std::uint64_t seed,
                           const std::string& config_hash) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : r.records) records.push_back(dlrm::to_json(rec));
  return {{"assignment", assignment_to_json(a)},
          {"auc", r.test.auc},
          {"logloss", r.test.logloss},
          {"validation_auc", r.validation.auc},
          {"validation_logloss", r.validation.logloss},
          {"best_epoch", r.best_epoch},
          {"p_r", r.p_r},
          {"flops", r.flops},
          {"seed", seed},
          {"config_hash", config_hash},
          {"records", records}};
}

}  // namespace embsizer::retrain
