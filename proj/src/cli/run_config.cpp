#include "embsizer/cli/run_config.hpp"

#include <fstream>
#include <set>

#include "embsizer/core/error.hpp"

namespace embsizer::cli {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require_object(j, where);
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (keys.count(key) == 0) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

DatasetSource dataset_from_json(const json& j) {
  check_keys(j, "dataset", {"synthetic", "csv", "loader", "movielens"});
  DatasetSource d;
  if (j.contains("synthetic")) {
    check_keys(j.at("synthetic"), "dataset.synthetic",
               {"fields", "samples", "seed", "noise", "base_rate", "main_scale", "interaction_scale",
                "latent_rank", "popularity_skew", "split"});
    if (j.at("synthetic").contains("fields") && j.at("synthetic").at("fields").is_array()) {
      for (const auto& f : j.at("synthetic").at("fields"))
        check_keys(f, "dataset.synthetic.fields[]", {"name", "cardinality", "informativeness"});
    }
    d.synthetic = data::synthetic_spec_from_json(j.at("synthetic"));
  }
  if (j.contains("csv")) d.csv = j.at("csv").get<std::string>();
  if (j.contains("loader")) {
    const auto& l = j.at("loader");
    check_keys(l, "dataset.loader", {"label", "timestamp", "fields", "split", "delimiter"});
    if (l.contains("fields") && l.at("fields").is_array()) {
      for (const auto& f : l.at("fields"))
        check_keys(f, "dataset.loader.fields[]", {"column", "multi_valued", "numeric", "buckets"});
    }
    d.loader = data::csv_config_from_json(l);
  }
  if (j.contains("movielens")) d.movielens = j.at("movielens").get<std::string>();
  const int sources = static_cast<int>(d.synthetic.has_value()) + static_cast<int>(d.csv.has_value()) +
                      static_cast<int>(d.movielens.has_value());
  if (sources > 1) throw ConfigError("dataset: give one of synthetic, csv, movielens");
  if (d.csv && !d.loader) throw ConfigError("dataset: csv needs a loader section");
  return d;
}

json dataset_to_json(const DatasetSource& d) {
  json j = json::object();
  if (d.synthetic) j["synthetic"] = data::synthetic_spec_to_json(*d.synthetic);
  if (d.csv) j["csv"] = d.csv->string();
  if (d.loader) j["loader"] = data::csv_config_to_json(*d.loader);
  if (d.movielens) j["movielens"] = d.movielens->string();
  return j;
}

}  // namespace

void RunConfig::validate() const {
  network.model.validate();
  if (network.transform.depth == 0) throw ConfigError("transform.depth must be >= 1");
  candidates.validate();
  sampler.validate();
  search.validate();
  if (supernet.epochs == 0) throw ConfigError("supernet.epochs must be >= 1");
  if (supernet.batch_size < 2) throw ConfigError("supernet.batch_size must be >= 2");
  if (retrain.epochs == 0) throw ConfigError("retrain.epochs must be >= 1");
  if (retrain.batch_size < 2) throw ConfigError("retrain.batch_size must be >= 2");
  if (baseline.sizes.empty()) throw ConfigError("baseline.sizes must not be empty");
  for (std::size_t s : baseline.sizes)
    if (s == 0) throw ConfigError("baseline.sizes entries must be >= 1");
  if (consistency.k < 2) throw ConfigError("consistency.k must be >= 2");
  if (consistency.standalone_epochs == 0) throw ConfigError("consistency.standalone_epochs must be >= 1");
  if (stability.runs == 0) throw ConfigError("stability.runs must be >= 1");
  if (out.empty()) throw ConfigError("out must not be empty");
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    check_keys(j, "run config",
               {"dataset", "model", "candidates", "scheme", "transform", "sampler", "supernet", "search",
                "retrain", "baseline", "consistency", "stability", "seed", "workers", "out"});
    if (j.contains("dataset")) c.dataset = dataset_from_json(j.at("dataset"));
    if (j.contains("model")) c.network.model = dlrm::model_config_from_json(j.at("model"));
    if (j.contains("candidates")) c.candidates.sizes = j.at("candidates").get<std::vector<std::size_t>>();
    if (j.contains("scheme")) c.network.scheme = supernet::scheme_from_string(j.at("scheme").get<std::string>());
    if (j.contains("transform")) {
      const auto& t = j.at("transform");
      check_keys(t, "transform", {"depth", "batch_norm"});
      read(t, "depth", c.network.transform.depth);
      read(t, "batch_norm", c.network.transform.batch_norm);
    }
    if (j.contains("sampler")) c.sampler = sampling::sampler_config_from_json(j.at("sampler"));
    if (j.contains("supernet")) {
      const auto& s = j.at("supernet");
      check_keys(s, "supernet", {"epochs", "batch_size", "max_batches"});
      read(s, "epochs", c.supernet.epochs);
      read(s, "batch_size", c.supernet.batch_size);
      read(s, "max_batches", c.supernet.max_batches);
    }
    if (j.contains("search")) c.search = search::search_config_from_json(j.at("search"));
    if (j.contains("retrain")) {
      const auto& r = j.at("retrain");
      check_keys(r, "retrain", {"epochs", "batch_size", "early_stopping", "eval_batch"});
      read(r, "epochs", c.retrain.epochs);
      read(r, "batch_size", c.retrain.batch_size);
      read(r, "early_stopping", c.retrain.early_stopping);
      read(r, "eval_batch", c.retrain.eval_batch);
    }
    if (j.contains("baseline")) {
      check_keys(j.at("baseline"), "baseline", {"sizes"});
      read(j.at("baseline"), "sizes", c.baseline.sizes);
    }
    if (j.contains("consistency")) {
      const auto& k = j.at("consistency");
      check_keys(k, "consistency", {"k", "standalone_epochs"});
      read(k, "k", c.consistency.k);
      read(k, "standalone_epochs", c.consistency.standalone_epochs);
    }
    if (j.contains("stability")) {
      check_keys(j.at("stability"), "stability", {"runs"});
      read(j.at("stability"), "runs", c.stability.runs);
    }
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

json run_config_to_json(const RunConfig& c) {
  return {{"dataset", dataset_to_json(c.dataset)},
          {"model", dlrm::model_config_to_json(c.network.model)},
          {"candidates", c.candidates.sizes},
          {"scheme", supernet::to_string(c.network.scheme)},
          {"transform", {{"depth", c.network.transform.depth}, {"batch_norm", c.network.transform.batch_norm}}},
          {"sampler", sampling::sampler_config_to_json(c.sampler)},
          {"supernet",
           {{"epochs", c.supernet.epochs}, {"batch_size", c.supernet.batch_size}, {"max_batches", c.supernet.max_batches}}},
          {"search", search::search_config_to_json(c.search)},
          {"retrain",
           {{"epochs", c.retrain.epochs},
            {"batch_size", c.retrain.batch_size},
            {"early_stopping", c.retrain.early_stopping},
            {"eval_batch", c.retrain.eval_batch}}},
          {"baseline", {{"sizes", c.baseline.sizes}}},
          {"consistency", {{"k", c.consistency.k}, {"standalone_epochs", c.consistency.standalone_epochs}}},
          {"stability", {{"runs", c.stability.runs}}},
          {"seed", c.seed},
          {"workers", c.workers},
          {"out", c.out.string()}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.scheme) c.network.scheme = supernet::scheme_from_string(*o.scheme);
  if (o.sampler) c.sampler.kind = sampling::sampler_kind_from_string(*o.sampler);
  if (o.mode) {
    const auto preset = search::PenaltyConfig::preset(*o.mode);
    c.search.penalty.lambda_r = preset.lambda_r;
    c.search.penalty.lambda_c = preset.lambda_c;
  }
  if (o.lambda_r) c.search.penalty.lambda_r = *o.lambda_r;
  if (o.lambda_c) c.search.penalty.lambda_c = *o.lambda_c;
  if (o.workers) c.workers = *o.workers;
  c.validate();
}

}  // namespace embsizer::cli
