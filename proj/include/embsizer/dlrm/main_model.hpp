#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/core/adam.hpp"
#include "embsizer/core/layers.hpp"
#include "embsizer/data/sample_table.hpp"
#include "embsizer/data/schema.hpp"
#include "embsizer/dlrm/embedding.hpp"

namespace embsizer::dlrm {

enum class Architecture { WideDeep, DeepFM };

const char* to_string(Architecture a) noexcept;
Architecture architecture_from_string(const std::string& s);

struct ModelConfig {
  Architecture architecture = Architecture::DeepFM;
  std::vector<std::size_t> hidden{128, 64, 1};
  std::size_t d_f = 16;
  double lr = 1e-3;
  // Wide term for WideDeep, first-order term for DeepFM.
  bool linear_term = true;
  // Pairwise interaction term; DeepFM only.
  bool fm_term = true;
  Precision precision = Precision::F64;
  double embedding_init = 0.05;

  void validate() const;
};

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

// The network that sits on top of the embedding layer. Its input is the
// B x (M * d_f) block of concatenated field embeddings; a field marked as
// excluded must be zero in the block and is also dropped from the linear
// term. Output is one logit per sample.
class MainModel {
 public:
  MainModel() = default;
  MainModel(const data::Schema& schema, const ModelConfig& config, RngStream& rng);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t num_fields() const noexcept { return linear_.size(); }

  std::vector<double> forward(const Matrix& block, const data::SampleTable& batch,
                              std::span<const char> included);
  std::vector<double> predict(const Matrix& block, const data::SampleTable& batch,
                              std::span<const char> included) const;
  // Takes d loss / d logit per sample, returns d loss / d block.
  Matrix backward(std::span<const double> d_logits);

  std::vector<Affine>& mlp() noexcept { return mlp_; }
  std::vector<EmbeddingTable>& linear() noexcept { return linear_; }

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  template <class Self>
  static std::vector<double> run(Self& self, const Matrix& block, const data::SampleTable& batch,
                                 std::span<const char> included);
  void check_input(const Matrix& block, const data::SampleTable& batch,
                   std::span<const char> included) const;

  ModelConfig config_;
  std::vector<Affine> mlp_;
  std::vector<Relu> relus_;
  std::vector<EmbeddingTable> linear_;

  // Cached for backward.
  Matrix block_;
  const data::SampleTable* batch_ = nullptr;
  std::vector<char> included_;
};

// 0.5 * (||sum_i e_i||^2 - sum_i ||e_i||^2) per row, i.e. the sum of pairwise
// dot products of the row's field embeddings.
std::vector<double> fm_interaction(const Matrix& block, std::size_t width);

}  // namespace embsizer::dlrm
