#include "embsizer/dlrm/dlrm_model.hpp"

#include "embsizer/core/error.hpp"
#include "embsizer/core/loss.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::dlrm {

DlrmModel::DlrmModel(const data::Schema& schema, const ModelConfig& config, std::uint64_t seed)
    : schema_(schema), all_included_(schema.size(), 1) {
  data::validate_schema(schema);
  config.validate();
  RngStream rng(seed);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    tables_.emplace_back("emb.f" + std::to_string(i), schema[i].cardinality, config.d_f,
                         schema[i].multi_valued, rng, config.embedding_init);
  }
  main_ = MainModel(schema, config, rng);
  adam_ = Adam({.lr = config.lr, .precision = config.precision});
}

Matrix DlrmModel::embed(const data::SampleTable& batch) const {
  if (batch.num_fields() != schema_.size()) throw ConfigError("batch field count mismatch");
  const std::size_t d = embedding_size();
  Matrix block(batch.size(), schema_.size() * d);
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    Matrix e = tables_[i].lookup(batch.column(i));
    for (std::size_t r = 0; r < batch.size(); ++r)
      std::copy(e.row(r).begin(), e.row(r).end(), block.row(r).begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return block;
}

double DlrmModel::train_step(const data::SampleTable& batch) {
  if (batch.empty()) throw DataError("train_step on an empty batch");
  Matrix block = embed(batch);
  auto logits = main_.forward(block, batch, all_included_);
  auto loss = binary_cross_entropy_with_logits(logits, batch.labels());
  Matrix d_block = main_.backward(loss.d_logits);
  const std::size_t d = embedding_size();
  Matrix d_e(batch.size(), d);
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    for (std::size_t r = 0; r < batch.size(); ++r) {
      auto src = d_block.row(r).subspan(i * d, d);
      std::copy(src.begin(), src.end(), d_e.row(r).begin());
    }
    tables_[i].backward(batch.column(i), d_e);
  }
  auto params = parameters();
  adam_.step(params);
  return loss.loss;
}

std::vector<double> DlrmModel::logits(const data::SampleTable& batch) const {
  return main_.predict(embed(batch), batch, all_included_);
}

std::vector<double> DlrmModel::predict(const data::SampleTable& batch) const {
  auto z = logits(batch);
  for (double& v : z) v = sigmoid(v);
  return z;
}

std::vector<Parameter*> DlrmModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& t : tables_) out.push_back(&t.param());
  main_.collect(out);
  return out;
}

std::vector<const Parameter*> DlrmModel::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& t : tables_) out.push_back(&t.param());
  main_.collect(out);
  return out;
}

void DlrmModel::save(Checkpoint& ckpt) const {
  ckpt.meta()["kind"] = "dlrm";
  ckpt.meta()["schema_hash"] = data::schema_hash_hex(schema_);
  ckpt.meta()["model"] = model_config_to_json(main_.config());
  for (const Parameter* p : parameters()) ckpt.put(p->name, p->value);
}

void DlrmModel::load(const Checkpoint& ckpt) {
  if (ckpt.meta().value("kind", "") != "dlrm") throw FormatError("checkpoint is not a dlrm model");
  if (ckpt.meta().value("schema_hash", "") != data::schema_hash_hex(schema_)) {
    throw FormatError("checkpoint schema hash does not match the dataset");
  }
  for (Parameter* p : parameters()) ckpt.get_into(p->name, p->value);
}

}  // namespace embsizer::dlrm
