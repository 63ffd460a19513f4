#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/core/matrix.hpp"
#include "embsizer/data/dataset.hpp"

namespace embsizer::data {

struct SyntheticField {
  std::string name;
  std::uint32_t cardinality = 2;
  double informativeness = 0.0;  // in [0, 1]
};

// Labels follow a logistic model
//
//   logit = bias + sum_i w_i * main_scale * a_i[x_i]
//         + sum_{i<j} w_i * w_j * interaction_scale * <u_i[x_i], u_j[x_j]> / sqrt(rank)
//         + noise * N(0, 1)
//
// where w_i is the field's informativeness, a_i[v] are unit-variance scalar
// effects (an evenly spaced grid, shuffled) and u_i[v] are standard normal
// latent vectors of length `latent_rank`. The interaction term is what makes
// embedding width matter: a field whose partner term has rank r needs about
// r dimensions to express it.
struct SyntheticSpec {
  std::vector<SyntheticField> fields;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double noise = 0.0;
  double base_rate = 0.5;
  double main_scale = 3.0;
  double interaction_scale = 3.0;
  std::size_t latent_rank = 8;
  // Value popularity follows p(rank k) ~ 1 / (k + 1)^skew over a random
  // ranking of each field's values; 0 draws values uniformly.
  double popularity_skew = 0.0;
  SplitRatios ratios;
};

void validate(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);

struct SyntheticTruth {
  double bias = 0.0;
  std::vector<double> informativeness;
  std::vector<std::vector<double>> main_effects;  // per field, per value (already weighted)
  std::vector<Matrix> latents;                    // per field, cardinality x rank
  std::vector<std::size_t> importance_order;      // fields by informativeness, descending
  double interaction_scale = 0.0;
  std::size_t latent_rank = 0;

  // Noise-free logit of a sample.
  double logit(const Sample& s) const;
};

struct SyntheticDataset {
  DatasetSplit split;
  SyntheticTruth truth;
};

// Sample i gets timestamp i; the split is the chronological 8:1:1 cut.
// Value indices are 0..cardinality-1 (no OOV slot: the generator knows the
// full vocabulary).
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace embsizer::data
