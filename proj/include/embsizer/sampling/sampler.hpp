#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/core/matrix.hpp"
#include "embsizer/data/schema.hpp"

namespace embsizer {
class RngStream;
}

namespace embsizer::sampling {

enum class SamplerKind { Adaptive, Random, VanillaUniform, WeightUniform };

const char* to_string(SamplerKind k) noexcept;
SamplerKind sampler_kind_from_string(const std::string& s);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::Adaptive;
  double eta_e = 0.05;
  double eta_f = 0.05;
  double lambda_fs = 0.6;
  double p_min = 0.1;
  double p_max = 0.95;
  double epsilon = 1e-3;
  double inclusion = 0.6;
  // When false every field is always included and no inclusion draws are made.
  bool feature_sampling = true;

  void validate() const;
};

nlohmann::json sampler_config_to_json(const SamplerConfig& c);
SamplerConfig sampler_config_from_json(const nlohmann::json& j);

// P_E (fields x candidates, rows on the simplex) and P_F (per-field inclusion).
struct SampleRates {
  Matrix pe;
  std::vector<double> pf;
};

// Per-field candidate choice plus inclusion flag for one training step.
struct Draw {
  std::vector<std::uint32_t> candidate;
  std::vector<char> included;
};

// Magnitudes observed for a field sampled in the last step: mean |dL/de| and
// mean |e| over the field's (pre-transform) embedding block.
struct FieldActivity {
  std::size_t field = 0;
  double mean_abs_grad = 0.0;
  double mean_abs_value = 0.0;
};

// Independent categorical draw per row of P_E.
std::vector<std::uint32_t> es_sample(const Matrix& pe, RngStream& rng);

// Independent Bernoulli per field. An all-excluded outcome is redrawn up to
// 16 times; after that the field with the largest P_F (first on ties) is
// forced in.
std::vector<char> fs_sample(std::span<const double> pf, RngStream& rng);
inline constexpr int kMaxRedraws = 16;

// Per row: subtract eta * standardized candidate variances, then project
// back to {sum 1, entries >= epsilon}. Rows with equal variances are left
// unchanged.
void update_pe(Matrix& pe, const Matrix& variances, double eta, double epsilon);

// Projects a row onto {sum 1, entries >= epsilon}: entries under the floor
// are pinned to it and the remaining mass is shared proportionally.
void project_row(std::span<double> row, double epsilon);

// Standardized activity scores of the sampled fields nudge their P_F; fewer
// than two sampled fields or equal scores leave P_F unchanged.
void update_pf(std::vector<double>& pf, std::span<const FieldActivity> sampled, double lambda_fs,
               double eta, double p_min, double p_max);

// Affine-free standardization (zero mean, unit population variance).
// Returns false, leaving `v` untouched, when the values are all equal.
bool standardize(std::span<double> v);

// Starting rates for a sampler kind over `sizes` candidates per field.
SampleRates initial_rates(const SamplerConfig& config, const data::Schema& schema,
                          std::span<const std::size_t> sizes);

class Sampler {
 public:
  Sampler() = default;
  Sampler(const SamplerConfig& config, const data::Schema& schema, std::vector<std::size_t> sizes);

  const SamplerConfig& config() const noexcept { return config_; }
  const SampleRates& rates() const noexcept { return rates_; }
  SampleRates& rates() noexcept { return rates_; }
  bool adaptive() const noexcept { return config_.kind == SamplerKind::Adaptive; }

  Draw draw(RngStream& rng) const;
  // Adaptive kind only; other kinds keep their fixed rates.
  void update(const Matrix& variances, std::span<const FieldActivity> sampled);

 private:
  SamplerConfig config_;
  std::vector<std::size_t> sizes_;
  SampleRates rates_;
};

// One draw from a fixed-rate baseline.
Draw baseline_sample(SamplerKind kind, const data::Schema& schema, std::span<const std::size_t> sizes,
                     RngStream& rng);

// CSV snapshots: "field,<size>,..." for P_E and "field,p_f" for P_F.
std::string pe_csv(const Matrix& pe, const data::Schema& schema, std::span<const std::size_t> sizes);
std::string pf_csv(std::span<const double> pf, const data::Schema& schema);

}  // namespace embsizer::sampling
