#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/core/adam.hpp"
#include "embsizer/core/checkpoint.hpp"
#include "embsizer/dlrm/main_model.hpp"
#include "embsizer/sampling/sampler.hpp"
#include "embsizer/supernet/store.hpp"
#include "embsizer/supernet/transform.hpp"

namespace embsizer::supernet {

// Candidate per field plus inclusion flag; excluded fields enter the main
// model as zero vectors of width d_f.
using Selection = sampling::Draw;

Selection full_selection(std::span<const std::uint32_t> candidates);

struct NetworkConfig {
  dlrm::ModelConfig model;
  Scheme scheme = Scheme::Shared;
  TransformConfig transform;
};

nlohmann::json network_config_to_json(const NetworkConfig& c);
NetworkConfig network_config_from_json(const nlohmann::json& j);

struct StepResult {
  double loss = 0.0;
  // One entry per included field, in field order.
  std::vector<sampling::FieldActivity> activity;
};

// Embedding store + transform bank + main model. A supernet offers every
// candidate size for every field; a fixed network (retraining, UES with
// transform) offers one.
class Network {
 public:
  Network() = default;
  Network(const data::Schema& schema, std::vector<std::vector<std::size_t>> sizes, const NetworkConfig& config,
          std::uint64_t seed);

  static Network supernet(const data::Schema& schema, const CandidateSet& candidates, const NetworkConfig& config,
                          std::uint64_t seed);
  // Independent tables of the given per-field sizes.
  static Network fixed(const data::Schema& schema, std::vector<std::size_t> sizes, const NetworkConfig& config,
                       std::uint64_t seed);

  const data::Schema& schema() const noexcept { return schema_; }
  const NetworkConfig& config() const noexcept { return config_; }
  std::size_t num_fields() const noexcept { return schema_.size(); }
  std::size_t d_f() const noexcept { return config_.model.d_f; }

  // Forward in train mode and backward; gradients accumulate into the
  // parameters and no optimizer step is taken.
  StepResult forward_backward(const data::SampleTable& batch, const Selection& selection);
  // forward_backward followed by one Adam step over touched parameters.
  StepResult train_step(const data::SampleTable& batch, const Selection& selection);
  // Logits / probabilities in inference mode (running batch-norm statistics).
  std::vector<double> logits(const data::SampleTable& batch, const Selection& selection) const;
  std::vector<double> predict(const data::SampleTable& batch, const Selection& selection) const;
  // Inference-mode transformed embedding of one field under candidate c.
  Matrix transformed(std::size_t field, std::uint32_t c, const data::FieldColumn& column) const;

  EmbeddingStore& store() noexcept { return store_; }
  const EmbeddingStore& store() const noexcept { return store_; }
  TransformBank& bank() noexcept { return bank_; }
  const TransformBank& bank() const noexcept { return bank_; }
  dlrm::MainModel& main() noexcept { return main_; }
  const dlrm::MainModel& main() const noexcept { return main_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  // Checksum over parameters and batch-norm running statistics.
  std::uint64_t checksum() const;

  // Copies the values of the matching candidate views, transforms and main
  // model from `source` (which must offer candidates[i]'s size for field i).
  // Optimizer state starts fresh.
  void inherit_from(const Network& source, std::span<const std::uint32_t> candidates);

  void save(Checkpoint& ckpt) const;
  static Network load(const Checkpoint& ckpt, const data::Schema& schema);

 private:
  struct Group {
    std::size_t size = 0;
    std::vector<std::size_t> fields;
    Matrix input;  // stacked pre-transform embeddings, field-major
  };
  std::vector<Group> build_groups(const data::SampleTable& batch, const Selection& selection) const;
  void check_selection(const data::SampleTable& batch, const Selection& selection) const;

  data::Schema schema_;
  NetworkConfig config_;
  EmbeddingStore store_;
  TransformBank bank_;
  dlrm::MainModel main_;
  Adam adam_;
};

}  // namespace embsizer::supernet
