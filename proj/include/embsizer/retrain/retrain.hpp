#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/data/dataset.hpp"
#include "embsizer/dlrm/training.hpp"
#include "embsizer/supernet/network.hpp"

namespace embsizer::retrain {

// Per-field embedding sizes, tied to the schema they were searched on.
struct SizeAssignment {
  std::vector<std::string> fields;
  std::vector<std::size_t> sizes;
  std::string schema_hash;
};

SizeAssignment make_assignment(const data::Schema& schema, std::vector<std::size_t> sizes);
// {"schema_hash": ..., "sizes": {field: size, ...}, "order": [field, ...]}
nlohmann::json assignment_to_json(const SizeAssignment& a);
SizeAssignment assignment_from_json(const nlohmann::json& j);
// Field order and schema hash must match; throws FormatError otherwise.
void check_assignment(const SizeAssignment& a, const data::Schema& schema);

// Row argmax of P; ties go to the smaller candidate.
std::vector<std::uint32_t> extract_candidates(const Matrix& p);
SizeAssignment extract_assignment(const Matrix& p, const supernet::CandidateSet& candidates,
                                  const data::Schema& schema);

// Multiply-adds per sample of the retrained model:
//   pooling     sum_i (k_i - 1) d_i, k_i = 1 for one-hot fields (no adds)
//   transform   sum_i d_i d_f  (+ (depth - 1) d_f^2 per field for deeper transforms)
//   MLP         sum over layers of in * out
//   interaction DeepFM: M (M - 1) / 2 * d_f; WideDeep: 0
// `avg_multi` gives the mean list length k_i of multi-valued fields.
std::uint64_t flops_estimate(const data::Schema& schema, std::span<const std::size_t> sizes,
                             const dlrm::ModelConfig& model, std::size_t transform_depth = 1,
                             std::span<const double> avg_multi = {});

struct RetrainOptions {
  std::size_t epochs = 5;
  std::size_t batch_size = 512;
  // Keep the epoch with the best validation AUC instead of the last one.
  bool early_stopping = true;
  std::uint64_t seed = 0;
  std::size_t eval_batch = 4096;
  bool evaluate_test = true;
};

struct RetrainResult {
  supernet::Network model;
  std::vector<dlrm::EpochRecord> records;
  std::vector<double> losses;
  std::size_t best_epoch = 0;
  dlrm::EvalResult validation;
  dlrm::EvalResult test;
  double p_r = 0.0;
  std::uint64_t flops = 0;
};

// Optional warm start: copy the chosen candidates' weights out of a supernet.
struct InheritFrom {
  const supernet::Network* source = nullptr;
  std::vector<std::uint32_t> candidates;
};

// Initialization stream of a retrained model. Salted away from the Init role
// itself, which the supernet of the same seed draws from.
std::uint64_t retrain_init_seed(std::uint64_t seed);

// Fresh tables of the assigned sizes, fresh transforms and main model,
// trained on the train split. Initialization uses retrain_init_seed and
// shuffling the Shuffle role of options.seed.
RetrainResult retrain(const data::DatasetSplit& split, std::span<const std::size_t> sizes,
                      const supernet::NetworkConfig& config, const RetrainOptions& options,
                      const InheritFrom& inherit = {});

nlohmann::json report_json(const SizeAssignment& a, const RetrainResult& r, std::uint64_t seed,
                           const std::string& config_hash);

}  // namespace embsizer::retrain
