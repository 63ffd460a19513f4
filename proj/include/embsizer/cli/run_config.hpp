#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/data/csv_loader.hpp"
#include "embsizer/data/synthetic.hpp"
#include "embsizer/retrain/retrain.hpp"
#include "embsizer/sampling/sampler.hpp"
#include "embsizer/search/search.hpp"
#include "embsizer/supernet/candidates.hpp"
#include "embsizer/supernet/network.hpp"
#include "embsizer/supernet/trainer.hpp"

namespace embsizer::cli {

// Where `synth` / `prep` get their rows from. Exactly one source is set.
struct DatasetSource {
  std::optional<data::SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> csv;
  std::optional<data::CsvConfig> loader;  // required with csv
  std::optional<std::filesystem::path> movielens;
};

struct BaselineOptions {
  std::vector<std::size_t> sizes{32};
};

struct ConsistencyOptions {
  std::size_t k = 20;
  std::size_t standalone_epochs = 2;
};

struct StabilityOptions {
  std::size_t runs = 10;
};

struct RunConfig {
  DatasetSource dataset;
  supernet::NetworkConfig network;
  supernet::CandidateSet candidates;
  sampling::SamplerConfig sampler;
  supernet::SupernetTrainOptions supernet;
  search::SearchConfig search;
  retrain::RetrainOptions retrain;
  BaselineOptions baseline;
  ConsistencyOptions consistency;
  StabilityOptions stability;
  std::uint64_t seed = 1;
  std::size_t workers = 0;  // 0 = available cores
  std::filesystem::path out = "out";

  // Throws ConfigError on any out-of-range field.
  void validate() const;
};

// Strict: unknown keys and wrong types raise ConfigError. Missing keys keep
// their defaults. The accepted layout is published in
// docs/run_config.schema.json.
RunConfig run_config_from_json(const nlohmann::json& j);
// The fully resolved config, every key present.
nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

// Command-line overrides, applied after the config file. `mode` resets both
// penalty weights to the preset before explicit lambdas apply.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> scheme;
  std::optional<std::string> sampler;
  std::optional<std::string> mode;
  std::optional<double> lambda_r;
  std::optional<double> lambda_c;
  std::optional<std::size_t> workers;
};

void apply_overrides(RunConfig& c, const Overrides& o);

}  // namespace embsizer::cli
