#pragma once

#include <cstdint>
#include <vector>

#include "embsizer/core/adam.hpp"
#include "embsizer/core/checkpoint.hpp"
#include "embsizer/dlrm/main_model.hpp"

namespace embsizer::dlrm {

// Stand-alone recommender with one embedding size for every field (the UES
// baselines). Embeddings feed the main model directly, so their width is the
// model's d_f.
class DlrmModel {
 public:
  DlrmModel(const data::Schema& schema, const ModelConfig& config, std::uint64_t seed);

  const data::Schema& schema() const noexcept { return schema_; }
  std::size_t embedding_size() const noexcept { return main_.config().d_f; }

  // One forward/backward/Adam step; returns the mean batch loss.
  double train_step(const data::SampleTable& batch);
  std::vector<double> predict(const data::SampleTable& batch) const;
  std::vector<double> logits(const data::SampleTable& batch) const;

  std::vector<EmbeddingTable>& tables() noexcept { return tables_; }
  MainModel& main() noexcept { return main_; }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  void save(Checkpoint& ckpt) const;
  void load(const Checkpoint& ckpt);

 private:
  Matrix embed(const data::SampleTable& batch) const;

  data::Schema schema_;
  std::vector<EmbeddingTable> tables_;
  MainModel main_;
  Adam adam_;
  std::vector<char> all_included_;
};

}  // namespace embsizer::dlrm
