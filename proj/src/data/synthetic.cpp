#include "embsizer/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embsizer/core/error.hpp"
#include "embsizer/core/layers.hpp"
#include "embsizer/core/rng.hpp"

namespace embsizer::data {

void validate(const SyntheticSpec& spec) {
  if (spec.fields.empty()) throw ConfigError("synthetic spec: no fields");
  for (const auto& f : spec.fields) {
    if (f.cardinality < 1) throw ConfigError("synthetic spec: field '" + f.name + "' has cardinality 0");
    if (!(f.informativeness >= 0.0 && f.informativeness <= 1.0))
      throw ConfigError("synthetic spec: informativeness of '" + f.name + "' outside [0,1]");
  }
  if (spec.samples < 10) throw ConfigError("synthetic spec: need at least 10 samples");
  if (!(spec.base_rate > 0.0 && spec.base_rate < 1.0)) throw ConfigError("synthetic spec: base_rate outside (0,1)");
  if (spec.noise < 0.0) throw ConfigError("synthetic spec: negative noise");
  if (spec.latent_rank < 1) throw ConfigError("synthetic spec: latent_rank must be >= 1");
  if (!(spec.popularity_skew >= 0.0)) throw ConfigError("synthetic spec: popularity_skew must be >= 0");
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    for (const auto& f : j.at("fields")) {
      s.fields.push_back({f.at("name").get<std::string>(), f.at("cardinality").get<std::uint32_t>(),
                          f.value("informativeness", 0.0)});
    }
    s.samples = j.value("samples", s.samples);
    s.seed = j.value("seed", s.seed);
    s.noise = j.value("noise", s.noise);
    s.base_rate = j.value("base_rate", s.base_rate);
    s.main_scale = j.value("main_scale", s.main_scale);
    s.interaction_scale = j.value("interaction_scale", s.interaction_scale);
    s.latent_rank = j.value("latent_rank", s.latent_rank);
    s.popularity_skew = j.value("popularity_skew", s.popularity_skew);
    if (j.contains("split")) {
      const auto r = j.at("split").get<std::vector<double>>();
      if (r.size() != 3) throw ConfigError("synthetic spec: split needs three ratios");
      s.ratios = {r[0], r[1], r[2]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  validate(s);
  return s;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& s) {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : s.fields)
    fields.push_back({{"name", f.name}, {"cardinality", f.cardinality}, {"informativeness", f.informativeness}});
  return {{"fields", fields},
          {"samples", s.samples},
          {"seed", s.seed},
          {"noise", s.noise},
          {"base_rate", s.base_rate},
          {"main_scale", s.main_scale},
          {"interaction_scale", s.interaction_scale},
          {"latent_rank", s.latent_rank},
          {"popularity_skew", s.popularity_skew},
          {"split", {s.ratios.train, s.ratios.validation, s.ratios.test}}};
}

double SyntheticTruth::logit(const Sample& s) const {
  double z = bias;
  const std::size_t m = main_effects.size();
  for (std::size_t i = 0; i < m; ++i) z += main_effects[i][s.values[i].at(0)];
  const double norm = interaction_scale / std::sqrt(static_cast<double>(latent_rank));
  for (std::size_t i = 0; i < m; ++i) {
    if (informativeness[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (informativeness[j] == 0.0) continue;
      auto ui = latents[i].row(s.values[i][0]);
      auto uj = latents[j].row(s.values[j][0]);
      double dot = 0.0;
      for (std::size_t k = 0; k < latent_rank; ++k) dot += ui[k] * uj[k];
      z += informativeness[i] * informativeness[j] * norm * dot;
    }
  }
  return z;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const std::size_t m = spec.fields.size();
  RngStream effect_rng = RngStream(spec.seed).fork(1);
  RngStream sample_rng = RngStream(spec.seed).fork(2);

  SyntheticDataset out;
  SyntheticTruth& truth = out.truth;
  truth.bias = std::log(spec.base_rate / (1.0 - spec.base_rate));
  truth.interaction_scale = spec.interaction_scale;
  truth.latent_rank = spec.latent_rank;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& f = spec.fields[i];
    truth.informativeness.push_back(f.informativeness);
    // Evenly spaced grid with unit variance, randomly assigned to values.
    std::vector<double> effects(f.cardinality);
    const double n = static_cast<double>(f.cardinality);
    for (std::size_t v = 0; v < f.cardinality; ++v) {
      const double grid = f.cardinality == 1 ? 0.0 : std::sqrt(3.0) * (2.0 * (static_cast<double>(v) + 0.5) / n - 1.0);
      effects[v] = f.informativeness * spec.main_scale * grid;
    }
    for (std::size_t v = effects.size(); v > 1; --v) std::swap(effects[v - 1], effects[effect_rng.uniform_int(v)]);
    truth.main_effects.push_back(std::move(effects));
    Matrix lat(f.cardinality, spec.latent_rank);
    for (double& x : lat.values()) x = effect_rng.normal();
    truth.latents.push_back(std::move(lat));
  }
  truth.importance_order.resize(m);
  std::iota(truth.importance_order.begin(), truth.importance_order.end(), std::size_t{0});
  std::stable_sort(truth.importance_order.begin(), truth.importance_order.end(),
                   [&](std::size_t a, std::size_t b) { return truth.informativeness[a] > truth.informativeness[b]; });

  // Cumulative popularity per field over a shuffled value ranking.
  std::vector<std::vector<double>> cdf(m);
  std::vector<std::vector<std::uint32_t>> ranked(m);
  if (spec.popularity_skew > 0.0) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t n = spec.fields[i].cardinality;
      ranked[i].resize(n);
      std::iota(ranked[i].begin(), ranked[i].end(), 0U);
      for (std::size_t v = n; v > 1; --v) std::swap(ranked[i][v - 1], ranked[i][effect_rng.uniform_int(v)]);
      double total = 0.0;
      for (std::uint32_t k = 0; k < n; ++k) {
        total += std::pow(static_cast<double>(k) + 1.0, -spec.popularity_skew);
        cdf[i].push_back(total);
      }
      for (double& c : cdf[i]) c /= total;
    }
  }
  auto draw_value = [&](std::size_t i) -> std::uint32_t {
    if (cdf[i].empty()) return static_cast<std::uint32_t>(sample_rng.uniform_int(spec.fields[i].cardinality));
    const auto k = std::upper_bound(cdf[i].begin(), cdf[i].end(), sample_rng.uniform()) - cdf[i].begin();
    return ranked[i][std::min<std::size_t>(static_cast<std::size_t>(k), ranked[i].size() - 1)];
  };

  SampleTable all(m);
  Sample s;
  s.values.assign(m, std::vector<std::uint32_t>(1));
  for (std::size_t r = 0; r < spec.samples; ++r) {
    for (std::size_t i = 0; i < m; ++i) s.values[i][0] = draw_value(i);
    const double z = truth.logit(s) + (spec.noise > 0.0 ? spec.noise * sample_rng.normal() : 0.0);
    s.label = sample_rng.bernoulli(sigmoid(z)) ? 1.0 : 0.0;
    s.timestamp = static_cast<std::int64_t>(r);
    all.append(s);
  }

  DatasetSplit& split = out.split;
  for (const auto& f : spec.fields) split.schema.push_back({f.name, f.cardinality, false});
  validate_schema(split.schema);
  chronological_split(all, spec.ratios, split.train, split.validation, split.test);
  return out;
}

}  // namespace embsizer::data
