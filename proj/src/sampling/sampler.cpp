#include "embsizer/sampling/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::sampling {

const char* to_string(SamplerKind k) noexcept {
  switch (k) {
    case SamplerKind::Adaptive: return "adaptive";
    case SamplerKind::Random: return "random";
    case SamplerKind::VanillaUniform: return "vanilla";
    case SamplerKind::WeightUniform: return "weight";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  for (auto k : {SamplerKind::Adaptive, SamplerKind::Random, SamplerKind::VanillaUniform,
                 SamplerKind::WeightUniform})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown sampler '" + s +
                    "' (expected adaptive, random, vanilla or weight)");
}

void SamplerConfig::validate() const {
  if (!(eta_e >= 0.0) || !(eta_f >= 0.0)) throw ConfigError("sampler: step sizes must be >= 0");
  if (!(lambda_fs >= 0.0 && lambda_fs <= 1.0)) throw ConfigError("sampler: lambda_fs must be in [0,1]");
  if (!(p_min > 0.0 && p_min <= p_max && p_max <= 1.0)) {
    throw ConfigError("sampler: need 0 < p_min <= p_max <= 1");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("sampler: epsilon must be in (0, 0.5)");
  if (!(inclusion >= p_min && inclusion <= p_max)) {
    throw ConfigError("sampler: initial inclusion must lie within [p_min, p_max]");
  }
}

nlohmann::json sampler_config_to_json(const SamplerConfig& c) {
  return {{"kind", to_string(c.kind)}, {"eta_e", c.eta_e},         {"eta_f", c.eta_f},
          {"lambda_fs", c.lambda_fs},  {"p_min", c.p_min},         {"p_max", c.p_max},
          {"epsilon", c.epsilon},      {"inclusion", c.inclusion}, {"feature_sampling", c.feature_sampling}};
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("sampler config must be an object");
  SamplerConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") c.kind = sampler_kind_from_string(value.get<std::string>());
    else if (key == "eta_e") c.eta_e = value.get<double>();
    else if (key == "eta_f") c.eta_f = value.get<double>();
    else if (key == "lambda_fs") c.lambda_fs = value.get<double>();
    else if (key == "p_min") c.p_min = value.get<double>();
    else if (key == "p_max") c.p_max = value.get<double>();
    else if (key == "epsilon") c.epsilon = value.get<double>();
    else if (key == "inclusion") c.inclusion = value.get<double>();
    else if (key == "feature_sampling") c.feature_sampling = value.get<bool>();
    else throw ConfigError("unknown sampler config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::vector<std::uint32_t> es_sample(const Matrix& pe, RngStream& rng) {
  std::vector<std::uint32_t> out(pe.rows());
  for (std::size_t i = 0; i < pe.rows(); ++i) out[i] = static_cast<std::uint32_t>(rng.categorical(pe.row(i)));
  return out;
}

std::vector<char> fs_sample(std::span<const double> pf, RngStream& rng) {
  std::vector<char> out(pf.size(), 0);
  if (pf.empty()) return out;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    bool any = false;
    for (std::size_t i = 0; i < pf.size(); ++i) {
      out[i] = rng.bernoulli(pf[i]) ? 1 : 0;
      any = any || out[i];
    }
    if (any) return out;
  }
  out[static_cast<std::size_t>(std::max_element(pf.begin(), pf.end()) - pf.begin())] = 1;
  return out;
}

bool standardize(std::span<double> v) {
  if (v.size() < 2) return false;
  // Exact check first: the mean of equal values can round away from them.
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return false;
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) return false;
  for (double& x : v) x = (x - mean) / sd;
  return true;
}

void project_row(std::span<double> row, double epsilon) {
  const std::size_t t = row.size();
  std::vector<char> pinned(t, 0);
  for (;;) {
    double free_mass = 0.0;
    std::size_t n_pinned = 0;
    for (std::size_t j = 0; j < t; ++j) {
      if (pinned[j]) ++n_pinned;
      else free_mass += std::max(row[j], 0.0);
    }
    const double target = 1.0 - epsilon * static_cast<double>(n_pinned);
    bool changed = false;
    for (std::size_t j = 0; j < t; ++j) {
      if (pinned[j]) {
        row[j] = epsilon;
        continue;
      }
      const double base = std::max(row[j], 0.0);
      row[j] = free_mass > 0.0 ? base * target / free_mass : target / static_cast<double>(t - n_pinned);
      if (row[j] < epsilon) {
        pinned[j] = 1;
        changed = true;
      }
    }
    if (!changed) return;
  }
}

void update_pe(Matrix& pe, const Matrix& variances, double eta, double epsilon) {
  if (!pe.same_shape(variances)) throw ConfigError("update_pe: variance shape mismatch");
  std::vector<double> z(pe.cols());
  for (std::size_t i = 0; i < pe.rows(); ++i) {
    auto v = variances.row(i);
    z.assign(v.begin(), v.end());
    if (!standardize(z)) continue;
    auto row = pe.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] -= eta * z[j];
    project_row(row, epsilon);
  }
}

void update_pf(std::vector<double>& pf, std::span<const FieldActivity> sampled, double lambda_fs,
               double eta, double p_min, double p_max) {
  std::vector<double> score;
  score.reserve(sampled.size());
  for (const auto& a : sampled) {
    if (a.field >= pf.size()) throw ConfigError("update_pf: field index out of range");
    score.push_back(lambda_fs * a.mean_abs_grad + (1.0 - lambda_fs) * a.mean_abs_value);
  }
  if (!standardize(score)) return;
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    double& p = pf[sampled[k].field];
    p = std::clamp(p + eta * score[k], p_min, p_max);
  }
}

SampleRates initial_rates(const SamplerConfig& config, const data::Schema& schema,
                          std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw ConfigError("sampler: no candidate sizes");
  const std::size_t m = schema.size();
  const std::size_t t = sizes.size();
  SampleRates r{Matrix(m, t), std::vector<double>(m, config.inclusion)};
  const bool by_size =
      config.kind == SamplerKind::VanillaUniform || config.kind == SamplerKind::WeightUniform;
  const double size_total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < t; ++j)
      r.pe(i, j) = by_size ? static_cast<double>(sizes[j]) / size_total : 1.0 / static_cast<double>(t);
  if (config.kind == SamplerKind::WeightUniform) {
    double mean_card = 0.0;
    for (const auto& f : schema) mean_card += f.cardinality;
    mean_card /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      r.pf[i] = std::clamp(config.inclusion * schema[i].cardinality / mean_card, config.p_min, config.p_max);
    }
  }
  return r;
}

Sampler::Sampler(const SamplerConfig& config, const data::Schema& schema, std::vector<std::size_t> sizes)
    : config_(config), sizes_(std::move(sizes)) {
  config_.validate();
  rates_ = initial_rates(config_, schema, sizes_);
}

Draw Sampler::draw(RngStream& rng) const {
  Draw d;
  d.candidate = es_sample(rates_.pe, rng);
  if (config_.feature_sampling) d.included = fs_sample(rates_.pf, rng);
  else d.included.assign(rates_.pf.size(), 1);
  return d;
}

void Sampler::update(const Matrix& variances, std::span<const FieldActivity> sampled) {
  if (!adaptive()) return;
  update_pe(rates_.pe, variances, config_.eta_e, config_.epsilon);
  if (config_.feature_sampling) {
    update_pf(rates_.pf, sampled, config_.lambda_fs, config_.eta_f, config_.p_min, config_.p_max);
  }
}

Draw baseline_sample(SamplerKind kind, const data::Schema& schema, std::span<const std::size_t> sizes,
                     RngStream& rng) {
  if (kind == SamplerKind::Adaptive) throw ConfigError("baseline_sample: adaptive is not a baseline");
  SamplerConfig c;
  c.kind = kind;
  return Sampler(c, schema, {sizes.begin(), sizes.end()}).draw(rng);
}

std::string pe_csv(const Matrix& pe, const data::Schema& schema, std::span<const std::size_t> sizes) {
  std::ostringstream os;
  os.precision(10);
  os << "field";
  for (std::size_t d : sizes) os << ',' << d;
  os << '\n';
  for (std::size_t i = 0; i < pe.rows(); ++i) {
    os << schema.at(i).name;
    for (double p : pe.row(i)) os << ',' << p;
    os << '\n';
  }
  return os.str();
}

std::string pf_csv(std::span<const double> pf, const data::Schema& schema) {
  std::ostringstream os;
  os.precision(10);
  os << "field,p_f\n";
  for (std::size_t i = 0; i < pf.size(); ++i) os << schema.at(i).name << ',' << pf[i] << '\n';
  return os.str();
}

}  // namespace embsizer::sampling
