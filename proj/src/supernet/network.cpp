#include "embsizer/supernet/network.hpp"

#include <algorithm>
#include <map>

#include "embsizer/core/error.hpp"
#include "embsizer/core/loss.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::supernet {

Selection full_selection(std::span<const std::uint32_t> candidates) {
  return {{candidates.begin(), candidates.end()}, std::vector<char>(candidates.size(), 1)};
}

nlohmann::json network_config_to_json(const NetworkConfig& c) {
  return {{"model", dlrm::model_config_to_json(c.model)},
          {"scheme", to_string(c.scheme)},
          {"transform", {{"depth", c.transform.depth}, {"batch_norm", c.transform.batch_norm}}}};
}

NetworkConfig network_config_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items())
    if (key != "model" && key != "scheme" && key != "transform") throw ConfigError("network config: unknown key '" + key + "'");
  for (const auto& [key, _] : j.at("transform").items())
    if (key != "depth" && key != "batch_norm") throw ConfigError("transform config: unknown key '" + key + "'");
  NetworkConfig c;
  c.model = dlrm::model_config_from_json(j.at("model"));
  c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  c.transform.depth = j.at("transform").at("depth").get<std::size_t>();
  c.transform.batch_norm = j.at("transform").at("batch_norm").get<bool>();
  return c;
}

Network::Network(const data::Schema& schema, std::vector<std::vector<std::size_t>> sizes,
                 const NetworkConfig& config, std::uint64_t seed)
    : schema_(schema), config_(config) {
  data::validate_schema(schema_);
  config_.model.validate();
  RngStream rng(seed);
  std::vector<std::size_t> all_sizes;
  for (const auto& d : sizes) all_sizes.insert(all_sizes.end(), d.begin(), d.end());
  store_ = EmbeddingStore(schema_, std::move(sizes), config_.scheme, rng, config_.model.embedding_init);
  bank_ = TransformBank(all_sizes, config_.model.d_f, config_.transform, rng);
  main_ = dlrm::MainModel(schema_, config_.model, rng);
  adam_ = Adam({.lr = config_.model.lr, .precision = config_.model.precision});
}

Network Network::supernet(const data::Schema& schema, const CandidateSet& candidates, const NetworkConfig& config,
                          std::uint64_t seed) {
  candidates.validate();
  return Network(schema, std::vector<std::vector<std::size_t>>(schema.size(), candidates.sizes), config, seed);
}

Network Network::fixed(const data::Schema& schema, std::vector<std::size_t> sizes, const NetworkConfig& config,
                       std::uint64_t seed) {
  if (sizes.size() != schema.size()) throw ConfigError("fixed network: one size per field required");
  std::vector<std::vector<std::size_t>> per_field;
  for (std::size_t s : sizes) per_field.push_back({s});
  NetworkConfig c = config;
  c.scheme = Scheme::Independent;
  return Network(schema, std::move(per_field), c, seed);
}

void Network::check_selection(const data::SampleTable& batch, const Selection& selection) const {
  if (batch.num_fields() != num_fields()) throw ConfigError("batch field count differs from the network");
  if (selection.candidate.size() != num_fields() || selection.included.size() != num_fields()) {
    throw ConfigError("selection length differs from the field count");
  }
  for (std::size_t i = 0; i < num_fields(); ++i) store_.size_of(i, selection.candidate[i]);
}

std::vector<Network::Group> Network::build_groups(const data::SampleTable& batch,
                                                  const Selection& selection) const {
  std::map<std::size_t, std::vector<std::size_t>> by_size;
  for (std::size_t i = 0; i < num_fields(); ++i)
    if (selection.included[i]) by_size[store_.size_of(i, selection.candidate[i])].push_back(i);
  const std::size_t b = batch.size();
  std::vector<Group> groups;
  for (auto& [size, fields] : by_size) {
    Group g{size, fields, Matrix(fields.size() * b, size)};
    for (std::size_t k = 0; k < fields.size(); ++k) {
      Matrix e = store_.lookup(fields[k], selection.candidate[fields[k]], batch.column(fields[k]));
      std::copy(e.values().begin(), e.values().end(), g.input.data() + k * b * size);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

namespace {

void scatter(const Matrix& y, const std::vector<std::size_t>& fields, std::size_t b, std::size_t d_f, Matrix& block) {
  for (std::size_t k = 0; k < fields.size(); ++k)
    for (std::size_t r = 0; r < b; ++r) {
      auto src = y.row(k * b + r);
      std::copy(src.begin(), src.end(), block.row(r).begin() + static_cast<std::ptrdiff_t>(fields[k] * d_f));
    }
}

Matrix gather(const Matrix& block, const std::vector<std::size_t>& fields, std::size_t b, std::size_t d_f) {
  Matrix out(fields.size() * b, d_f);
  for (std::size_t k = 0; k < fields.size(); ++k)
    for (std::size_t r = 0; r < b; ++r) {
      auto src = block.row(r).subspan(fields[k] * d_f, d_f);
      std::copy(src.begin(), src.end(), out.row(k * b + r).begin());
    }
  return out;
}

double mean_abs(const double* p, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs(p[k]);
  return n == 0 ? 0.0 : s / static_cast<double>(n);
}

}  // namespace

StepResult Network::forward_backward(const data::SampleTable& batch, const Selection& selection) {
  if (batch.empty()) throw DataError("train_step on an empty batch");
  check_selection(batch, selection);
  const std::size_t b = batch.size();
  const std::size_t d_f = this->d_f();
  auto groups = build_groups(batch, selection);
  Matrix block(b, num_fields() * d_f);
  for (auto& g : groups) scatter(bank_.at(g.size).forward(g.input, Mode::Train), g.fields, b, d_f, block);

  auto logits = main_.forward(block, batch, selection.included);
  auto loss = binary_cross_entropy_with_logits(logits, batch.labels());
  Matrix d_block = main_.backward(loss.d_logits);

  StepResult result;
  result.loss = loss.loss;
  for (auto& g : groups) {
    Matrix dx = bank_.at(g.size).backward(gather(d_block, g.fields, b, d_f));
    for (std::size_t k = 0; k < g.fields.size(); ++k) {
      const std::size_t field = g.fields[k];
      Matrix slice(b, g.size);
      std::copy(dx.data() + k * b * g.size, dx.data() + (k + 1) * b * g.size, slice.data());
      store_.backward(field, selection.candidate[field], batch.column(field), slice);
      result.activity.push_back({field, mean_abs(slice.data(), slice.size()),
                                 mean_abs(g.input.data() + k * b * g.size, b * g.size)});
    }
  }
  std::sort(result.activity.begin(), result.activity.end(),
            [](const auto& a, const auto& c) { return a.field < c.field; });
  if (config_.model.precision == Precision::F32) {
    for (auto& g : groups) {
      auto& bn = bank_.at(g.size).batch_norm();
      round_to_float(bn.running_mean());
      round_to_float(bn.running_var());
    }
  }
  return result;
}

StepResult Network::train_step(const data::SampleTable& batch, const Selection& selection) {
  StepResult result = forward_backward(batch, selection);
  auto params = parameters();
  adam_.step(params);
  return result;
}

std::vector<double> Network::logits(const data::SampleTable& batch, const Selection& selection) const {
  check_selection(batch, selection);
  const std::size_t b = batch.size();
  Matrix block(b, num_fields() * d_f());
  for (const auto& g : build_groups(batch, selection)) {
    scatter(bank_.at(g.size).predict(g.input), g.fields, b, d_f(), block);
  }
  return main_.predict(block, batch, selection.included);
}

std::vector<double> Network::predict(const data::SampleTable& batch, const Selection& selection) const {
  auto z = logits(batch, selection);
  for (double& v : z) v = sigmoid(v);
  return z;
}

Matrix Network::transformed(std::size_t field, std::uint32_t c, const data::FieldColumn& column) const {
  return bank_.at(store_.size_of(field, c)).predict(store_.lookup(field, c, column));
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  store_.collect(out);
  bank_.collect(out);
  main_.collect(out);
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  std::vector<const Parameter*> out;
  store_.collect(out);
  bank_.collect(out);
  main_.collect(out);
  return out;
}

std::uint64_t Network::checksum() const {
  auto params = parameters();
  std::vector<Parameter> stats;
  for (std::size_t s : bank_.sizes()) {
    const auto& bn = bank_.at(s).batch_norm();
    Parameter mean("", 0, 0), var("", 0, 0);
    mean.value = bn.running_mean();
    var.value = bn.running_var();
    stats.push_back(std::move(mean));
    stats.push_back(std::move(var));
  }
  for (const auto& p : stats) params.push_back(&p);
  return embsizer::checksum(params);
}

void Network::inherit_from(const Network& source, std::span<const std::uint32_t> candidates) {
  if (source.num_fields() != num_fields() || candidates.size() != num_fields()) {
    throw ConfigError("inherit: field count mismatch");
  }
  if (source.d_f() != d_f() || source.config_.model.architecture != config_.model.architecture ||
      source.config_.model.hidden != config_.model.hidden) {
    throw ConfigError("inherit: main model configurations differ");
  }
  for (std::size_t i = 0; i < num_fields(); ++i) {
    if (store_.num_candidates(i) != 1 || store_.size_of(i, 0) != source.store_.size_of(i, candidates[i])) {
      throw ConfigError("inherit: field " + std::to_string(i) + " size does not match the source candidate");
    }
    store_.tables(i)[0].param().value = source.store_.view(i, candidates[i]);
  }
  for (std::size_t s : bank_.sizes()) bank_.at(s) = source.bank_.at(s);
  main_ = source.main_;
  for (Parameter* p : parameters()) {
    p->zero_grad();
    p->grad.fill(0.0);
    p->m.fill(0.0);
    p->v.fill(0.0);
    p->steps = 0;
  }
}

void Network::save(Checkpoint& ckpt) const {
  ckpt.meta()["kind"] = "network";
  ckpt.meta()["schema"] = data::schema_to_json(schema_);
  ckpt.meta()["schema_hash"] = data::schema_hash_hex(schema_);
  ckpt.meta()["sizes"] = store_.sizes();
  ckpt.meta()["config"] = network_config_to_json(config_);
  for (const Parameter* p : parameters()) ckpt.put(p->name, p->value);
  for (std::size_t s : bank_.sizes()) {
    const std::string base = "transform.d" + std::to_string(s) + ".bn";
    ckpt.put(base + ".running_mean", bank_.at(s).batch_norm().running_mean());
    ckpt.put(base + ".running_var", bank_.at(s).batch_norm().running_var());
  }
}

Network Network::load(const Checkpoint& ckpt, const data::Schema& schema) {
  const auto& meta = ckpt.meta();
  if (meta.value("kind", "") != "network") throw FormatError("checkpoint does not hold a network");
  if (meta.value("schema_hash", "") != data::schema_hash_hex(schema)) {
    throw FormatError("checkpoint schema hash " + meta.value("schema_hash", std::string("?")) +
                      " does not match dataset schema hash " + data::schema_hash_hex(schema));
  }
  Network net(schema, meta.at("sizes").get<std::vector<std::vector<std::size_t>>>(),
              network_config_from_json(meta.at("config")), 0);
  for (Parameter* p : net.parameters()) ckpt.get_into(p->name, p->value);
  for (std::size_t s : net.bank_.sizes()) {
    const std::string base = "transform.d" + std::to_string(s) + ".bn";
    ckpt.get_into(base + ".running_mean", net.bank_.at(s).batch_norm().running_mean());
    ckpt.get_into(base + ".running_var", net.bank_.at(s).batch_norm().running_var());
  }
  return net;
}

}  // namespace embsizer::supernet
