#include "embsizer/dlrm/main_model.hpp"

#include <algorithm>
#include <type_traits>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::dlrm {

const char* to_string(Architecture a) noexcept {
  return a == Architecture::WideDeep ? "WideDeep" : "DeepFM";
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "WideDeep") return Architecture::WideDeep;
  if (s == "DeepFM") return Architecture::DeepFM;
  throw ConfigError("unknown architecture '" + s + "' (expected WideDeep or DeepFM)");
}

void ModelConfig::validate() const {
  if (hidden.empty() || hidden.back() != 1) throw ConfigError("model: last hidden width must be 1");
  for (std::size_t h : hidden)
    if (h == 0) throw ConfigError("model: hidden widths must be positive");
  if (d_f == 0) throw ConfigError("model: d_f must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("model: learning rate must be >= 0");
  if (!(embedding_init > 0.0)) throw ConfigError("model: embedding_init must be > 0");
}

nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"architecture", to_string(c.architecture)},
          {"hidden", c.hidden},
          {"d_f", c.d_f},
          {"lr", c.lr},
          {"linear_term", c.linear_term},
          {"fm_term", c.fm_term},
          {"precision", c.precision == Precision::F32 ? "f32" : "f64"},
          {"embedding_init", c.embedding_init}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (!j.is_object()) throw ConfigError("model config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "architecture") c.architecture = architecture_from_string(value.get<std::string>());
    else if (key == "hidden") c.hidden = value.get<std::vector<std::size_t>>();
    else if (key == "d_f") c.d_f = value.get<std::size_t>();
    else if (key == "lr") c.lr = value.get<double>();
    else if (key == "linear_term") c.linear_term = value.get<bool>();
    else if (key == "fm_term") c.fm_term = value.get<bool>();
    else if (key == "embedding_init") c.embedding_init = value.get<double>();
    else if (key == "precision") {
      const auto p = value.get<std::string>();
      if (p == "f32") c.precision = Precision::F32;
      else if (p == "f64") c.precision = Precision::F64;
      else throw ConfigError("model.precision must be f32 or f64");
    } else {
      throw ConfigError("unknown model config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

MainModel::MainModel(const data::Schema& schema, const ModelConfig& config, RngStream& rng)
    : config_(config) {
  config_.validate();
  std::size_t in = schema.size() * config_.d_f;
  for (std::size_t l = 0; l < config_.hidden.size(); ++l) {
    mlp_.emplace_back("mlp.l" + std::to_string(l), in, config_.hidden[l], rng);
    in = config_.hidden[l];
  }
  relus_.resize(mlp_.size());
  // Linear weights start at zero and draw nothing from the stream, so both
  // architectures consume identical initialization sequences.
  for (std::size_t i = 0; i < schema.size(); ++i) {
    linear_.push_back(EmbeddingTable::zeros("linear.f" + std::to_string(i), schema[i].cardinality, 1,
                                            schema[i].multi_valued));
  }
}

void MainModel::check_input(const Matrix& block, const data::SampleTable& batch,
                            std::span<const char> included) const {
  const std::size_t m = num_fields();
  if (block.cols() != m * config_.d_f) {
    throw ConfigError("main model expects " + std::to_string(m) + " fields of width d_f=" +
                      std::to_string(config_.d_f) + ", got block width " + std::to_string(block.cols()));
  }
  if (block.rows() != batch.size()) throw ConfigError("main model: block/batch row mismatch");
  if (batch.num_fields() != m || included.size() != m) {
    throw ConfigError("main model: field count mismatch");
  }
}

std::vector<double> fm_interaction(const Matrix& block, std::size_t width) {
  const std::size_t m = block.cols() / width;
  std::vector<double> out(block.rows(), 0.0);
  std::vector<double> sum(width);
  for (std::size_t r = 0; r < block.rows(); ++r) {
    auto row = block.row(r);
    std::fill(sum.begin(), sum.end(), 0.0);
    double squares = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < width; ++k) {
        const double e = row[i * width + k];
        sum[k] += e;
        squares += e * e;
      }
    double total = 0.0;
    for (double s : sum) total += s * s;
    out[r] = 0.5 * (total - squares);
  }
  return out;
}

template <class Self>
std::vector<double> MainModel::run(Self& self, const Matrix& block, const data::SampleTable& batch,
                                   std::span<const char> included) {
  self.check_input(block, batch, included);
  Matrix h = block;
  for (std::size_t l = 0; l < self.mlp_.size(); ++l) {
    if constexpr (std::is_const_v<Self>) {
      h = self.mlp_[l].predict(h);
      if (l + 1 < self.mlp_.size()) h = relu(h);
    } else {
      h = self.mlp_[l].forward(h);
      if (l + 1 < self.mlp_.size()) h = self.relus_[l].forward(h);
    }
  }
  std::vector<double> logits(block.rows());
  for (std::size_t r = 0; r < logits.size(); ++r) logits[r] = h(r, 0);

  if (self.config_.linear_term) {
    for (std::size_t i = 0; i < self.linear_.size(); ++i) {
      if (!included[i]) continue;
      Matrix w = self.linear_[i].lookup(batch.column(i));
      for (std::size_t r = 0; r < logits.size(); ++r) logits[r] += w(r, 0);
    }
  }
  if (self.config_.architecture == Architecture::DeepFM && self.config_.fm_term) {
    auto fm = fm_interaction(block, self.config_.d_f);
    for (std::size_t r = 0; r < logits.size(); ++r) logits[r] += fm[r];
  }
  return logits;
}

std::vector<double> MainModel::forward(const Matrix& block, const data::SampleTable& batch,
                                       std::span<const char> included) {
  auto logits = run(*this, block, batch, included);
  block_ = block;
  batch_ = &batch;
  included_.assign(included.begin(), included.end());
  return logits;
}

std::vector<double> MainModel::predict(const Matrix& block, const data::SampleTable& batch,
                                       std::span<const char> included) const {
  return run(*this, block, batch, included);
}

Matrix MainModel::backward(std::span<const double> d_logits) {
  if (batch_ == nullptr || d_logits.size() != block_.rows()) {
    throw ConfigError("main model: backward without matching forward");
  }
  const std::size_t n = d_logits.size();
  Matrix dy(n, 1);
  for (std::size_t r = 0; r < n; ++r) dy(r, 0) = d_logits[r];
  Matrix d = dy;
  for (std::size_t l = mlp_.size(); l-- > 0;) {
    if (l + 1 < mlp_.size()) d = relus_[l].backward(d);
    d = mlp_[l].backward(d);
  }
  Matrix& d_block = d;

  if (config_.linear_term) {
    for (std::size_t i = 0; i < linear_.size(); ++i)
      if (included_[i]) linear_[i].backward(batch_->column(i), dy);
  }
  if (config_.architecture == Architecture::DeepFM && config_.fm_term) {
    const std::size_t w = config_.d_f;
    const std::size_t m = num_fields();
    std::vector<double> sum(w);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = block_.row(r);
      auto drow = d_block.row(r);
      std::fill(sum.begin(), sum.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < w; ++k) sum[k] += row[i * w + k];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < w; ++k)
          drow[i * w + k] += d_logits[r] * (sum[k] - row[i * w + k]);
    }
  }
  return d_block;
}

void MainModel::collect(std::vector<Parameter*>& out) {
  for (auto& a : mlp_) a.collect(out);
  for (auto& t : linear_) out.push_back(&t.param());
}

void MainModel::collect(std::vector<const Parameter*>& out) const {
  for (const auto& a : mlp_) a.collect(out);
  for (const auto& t : linear_) out.push_back(&t.param());
}

}  // namespace embsizer::dlrm
