#include "embsizer/cli/stages.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "embsizer/analysis/consistency.hpp"
#include "embsizer/analysis/parallel.hpp"
#include "embsizer/analysis/stability.hpp"
#include "embsizer/core/checkpoint.hpp"
#include "embsizer/core/error.hpp"
#include "embsizer/core/rng.hpp"
#include "embsizer/data/movielens.hpp"
#include "embsizer/dlrm/dlrm_model.hpp"
#include "embsizer/dlrm/training.hpp"
#include "embsizer/search/penalty.hpp"

#ifndef EMBSIZER_BUILD_ID
#define EMBSIZER_BUILD_ID "unknown"
#endif

namespace embsizer::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Collects the stage's artifacts, in the order they were written.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  const fs::path& dir() const noexcept { return dir_; }
  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

struct Context {
  const StageRequest& request;
  const RunConfig& config;
  Outputs& out;
};

fs::path require_input(const std::optional<fs::path>& given, const fs::path& fallback, const char* flag) {
  if (given) return *given;
  if (fs::exists(fallback)) return fallback;
  throw ConfigError(std::string("missing input: pass ") + flag + " (no " + fallback.string() + " either)");
}

data::DatasetSplit load_data(const Context& ctx) {
  const auto path = require_input(ctx.request.inputs.data, ctx.config.out / "split.bin", "--data");
  spdlog::info("reading split {}", path.string());
  return data::read_split(path);
}

struct LoadedSupernet {
  supernet::Network net;
  supernet::CandidateSet candidates;
};

LoadedSupernet load_supernet(const Context& ctx, const data::Schema& schema) {
  const auto path = require_input(ctx.request.inputs.supernet, ctx.config.out / "supernet.ckpt", "--supernet");
  const Checkpoint ckpt = Checkpoint::load(path);
  const std::string expected = data::schema_hash_hex(schema);
  const std::string found = ckpt.meta().value("schema_hash", std::string());
  if (found != expected) {
    throw FormatError("stale schema hash: checkpoint " + path.string() + " was trained on schema " + found +
                      ", dataset has " + expected);
  }
  LoadedSupernet s;
  s.net = supernet::Network::load(ckpt, schema);
  if (!ckpt.meta().contains("candidates")) throw FormatError("checkpoint " + path.string() + " has no candidate set");
  s.candidates.sizes = ckpt.meta().at("candidates").get<std::vector<std::size_t>>();
  s.candidates.validate();
  return s;
}

std::string config_hash(const RunConfig& c) {
  const std::string text = run_config_to_json(c).dump();
  return hex(fnv1a(text.data(), text.size()));
}

json split_summary(const data::DatasetSplit& split) {
  return {{"schema", data::schema_to_json(split.schema)},
          {"schema_hash", data::schema_hash_hex(split.schema)},
          {"rows", {{"train", split.train.size()}, {"validation", split.validation.size()}, {"test", split.test.size()}}}};
}

search::SearchConfig search_config(const RunConfig& c) {
  search::SearchConfig s = c.search;
  s.evaluator.seed = role_seed(c.seed, SeedRole::Subsample);
  return s;
}

// ------------------------------------------------------------------ stages

void stage_synth(Context& ctx) {
  if (!ctx.config.dataset.synthetic) throw ConfigError("synth needs dataset.synthetic in the config");
  const auto ds = data::generate_synthetic(*ctx.config.dataset.synthetic);
  data::write_split(ctx.out.path("split.bin"), ds.split);
  json summary = split_summary(ds.split);
  summary["informativeness"] = ds.truth.informativeness;
  summary["importance_order"] = ds.truth.importance_order;
  write_json(ctx.out.path("dataset.json"), summary);
  spdlog::info("synthetic split: {} / {} / {} rows", ds.split.train.size(), ds.split.validation.size(),
               ds.split.test.size());
}

void stage_prep(Context& ctx) {
  const auto& d = ctx.config.dataset;
  data::DatasetSplit split;
  if (d.movielens) {
    const auto csv = ctx.out.path("movielens.csv");
    auto loader = data::convert_movielens(*d.movielens, csv);
    write_json(ctx.out.path("loader.json"), data::csv_config_to_json(loader));
    split = data::load_csv(csv, loader);
  } else if (d.csv) {
    split = data::load_csv(*d.csv, *d.loader);
  } else {
    throw ConfigError("prep needs dataset.csv (with loader) or dataset.movielens in the config");
  }
  data::write_split(ctx.out.path("split.bin"), split);
  write_json(ctx.out.path("dataset.json"), split_summary(split));
}

void stage_train_supernet(Context& ctx) {
  const auto split = load_data(ctx);
  const auto& c = ctx.config;
  auto net = supernet::Network::supernet(split.schema, c.candidates, c.network, role_seed(c.seed, SeedRole::Init));
  sampling::Sampler sampler(c.sampler, split.schema, c.candidates.sizes);
  supernet::SupernetTrainOptions options = c.supernet;
  options.seed = c.seed;

  const fs::path rates_dir = ctx.out.dir() / "rates";
  fs::create_directories(rates_dir);
  auto snapshot = [&](const std::string& tag, const sampling::Sampler& s) {
    write_text(ctx.out.path("rates/pe_" + tag + ".csv"),
               sampling::pe_csv(s.rates().pe, split.schema, c.candidates.sizes));
    write_text(ctx.out.path("rates/pf_" + tag + ".csv"), sampling::pf_csv(s.rates().pf, split.schema));
  };
  snapshot("initial", sampler);
  const auto start = std::chrono::steady_clock::now();
  const auto result = supernet::train_supernet(net, split.train, sampler, options, [&](std::size_t epoch, const auto& s) {
    spdlog::info("supernet epoch {} done", epoch + 1);
    snapshot("epoch" + std::to_string(epoch + 1), s);
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Checkpoint ckpt;
  supernet::save_supernet(net, sampler, ckpt);
  ckpt.save(ctx.out.path("supernet.ckpt"));

  std::ostringstream losses;
  losses << "batch,loss\n";
  for (std::size_t i = 0; i < result.losses.size(); ++i) losses << i << ',' << result.losses[i] << '\n';
  write_text(ctx.out.path("losses.csv"), losses.str());

  const std::size_t tail = std::min<std::size_t>(50, result.losses.size());
  double tail_mean = 0.0;
  for (std::size_t i = result.losses.size() - tail; i < result.losses.size(); ++i) tail_mean += result.losses[i];
  if (tail > 0) tail_mean /= static_cast<double>(tail);
  write_json(ctx.out.path("train_supernet.json"),
             {{"batches", result.losses.size()},
              {"final_loss", tail_mean},
              {"seconds", seconds},
              {"scheme", supernet::to_string(c.network.scheme)},
              {"sampler", sampling::to_string(c.sampler.kind)},
              {"schema_hash", data::schema_hash_hex(split.schema)},
              {"checksum", hex(net.checksum())}});
}

void stage_search(Context& ctx) {
  const auto split = load_data(ctx);
  const auto loaded = load_supernet(ctx, split.schema);
  const auto config = search_config(ctx.config);
  const search::SubnetEvaluator evaluator(loaded.net, split.validation, config.evaluator);
  const auto result = search::run_search(evaluator, loaded.candidates, config, ctx.config.seed);

  const auto assignment = retrain::make_assignment(split.schema, result.sizes);
  write_json(ctx.out.path("assignment.json"), retrain::assignment_to_json(assignment));
  write_text(ctx.out.path("p.csv"), search::matrix_csv(result.p, split.schema, loaded.candidates.sizes));
  write_text(ctx.out.path("history.csv"), search::history_csv(result.history));

  std::vector<std::uint32_t> cards;
  for (const auto& f : split.schema) cards.push_back(f.cardinality);
  const auto eval = evaluator.evaluate(result.candidates);
  write_json(ctx.out.path("search.json"),
             {{"sizes", result.sizes},
              {"converged", result.converged},
              {"steps", result.history.size()},
              {"lambda_r", config.penalty.lambda_r},
              {"lambda_c", config.penalty.lambda_c},
              {"expected_params", search::expected_param_count(result.p, loaded.candidates.sizes, cards)},
              {"assignment_params", supernet::assignment_param_count(split.schema, result.sizes)},
              {"p_r", supernet::parameter_reduction(split.schema, result.sizes)},
              {"supernet_auc", eval.auc},
              {"supernet_logloss", eval.logloss}});
  spdlog::info("search finished after {} steps (converged: {})", result.history.size(), result.converged);
}

void stage_retrain(Context& ctx) {
  const auto split = load_data(ctx);
  const auto path = require_input(ctx.request.inputs.assignment, ctx.config.out / "assignment.json", "--assignment");
  const auto assignment = retrain::assignment_from_json(read_json(path));
  retrain::check_assignment(assignment, split.schema);

  std::optional<LoadedSupernet> source;
  retrain::InheritFrom inherit;
  if (ctx.request.inputs.supernet) {
    source = load_supernet(ctx, split.schema);
    inherit.source = &source->net;
    for (std::size_t s : assignment.sizes) inherit.candidates.push_back(source->candidates.index_of(s));
  }
  retrain::RetrainOptions options = ctx.config.retrain;
  options.seed = ctx.config.seed;
  const auto result = retrain::retrain(split, assignment.sizes, ctx.config.network, options, inherit);

  Checkpoint ckpt;
  result.model.save(ckpt);
  ckpt.save(ctx.out.path("model.ckpt"));
  std::string lines;
  for (const auto& r : result.records) lines += dlrm::to_json(r).dump() + "\n";
  write_text(ctx.out.path("metrics.jsonl"), lines);
  json report = retrain::report_json(assignment, result, ctx.config.seed, config_hash(ctx.config));
  report["inherited"] = source.has_value();
  write_json(ctx.out.path("retrain.json"), report);
  spdlog::info("retrained: test AUC {:.4f}, P-R {:.4f}", result.test.auc, result.p_r);
}

void stage_baseline(Context& ctx) {
  const auto split = load_data(ctx);
  const auto& c = ctx.config;
  const auto sizes = ctx.request.inputs.ues.empty() ? c.baseline.sizes : ctx.request.inputs.ues;
  for (std::size_t k : sizes) {
    if (k == 0) throw ConfigError("UES size must be >= 1");
    dlrm::ModelConfig model = c.network.model;
    model.d_f = k;
    dlrm::DlrmModel net(split.schema, model, role_seed(c.seed, SeedRole::Init));
    const auto predict = [&](const data::SampleTable& t) { return net.predict(t); };
    dlrm::EpochOptions eo;
    eo.batch_size = c.retrain.batch_size;
    eo.shuffle_seed = role_seed(c.seed, SeedRole::Shuffle);

    json records = json::array();
    Checkpoint best;
    double best_auc = -1.0;
    std::size_t best_epoch = 0;
    for (std::size_t epoch = 0; epoch < c.retrain.epochs; ++epoch) {
      dlrm::run_epoch([&](const data::SampleTable& b) { return net.train_step(b); }, split.train, epoch, eo);
      const auto val = dlrm::evaluate(predict, split.validation, c.retrain.eval_batch);
      records.push_back(dlrm::to_json({epoch + 1, "validation", val}));
      if (!c.retrain.early_stopping || val.auc > best_auc) {
        best_auc = val.auc;
        best_epoch = epoch + 1;
        best = Checkpoint();
        net.save(best);
      }
    }
    net.load(best);
    const auto val = dlrm::evaluate(predict, split.validation, c.retrain.eval_batch);
    const auto test = dlrm::evaluate(predict, split.test, c.retrain.eval_batch);
    const std::vector<std::size_t> uniform(split.schema.size(), k);
    const std::string tag = "ues" + std::to_string(k);
    best.save(ctx.out.path("baseline_" + tag + ".ckpt"));
    write_json(ctx.out.path("baseline_" + tag + ".json"),
               {{"ues", k},
                {"embedding_params", supernet::assignment_param_count(split.schema, uniform)},
                {"p_r", supernet::parameter_reduction(split.schema, uniform)},
                {"best_epoch", best_epoch},
                {"validation_auc", val.auc},
                {"validation_logloss", val.logloss},
                {"auc", test.auc},
                {"logloss", test.logloss},
                {"records", records}});
    spdlog::info("UES-{}: test AUC {:.4f}", k, test.auc);
  }
}

std::size_t workers(const RunConfig& c) { return c.workers == 0 ? analysis::default_workers() : c.workers; }

void stage_consistency(Context& ctx) {
  const auto split = load_data(ctx);
  const auto loaded = load_supernet(ctx, split.schema);
  const auto config = search_config(ctx.config);
  const search::SubnetEvaluator evaluator(loaded.net, split.validation, config.evaluator);
  const auto standalone =
      analysis::standalone_scorer(split, evaluator.subsample(), loaded.net.config(),
                                  ctx.config.consistency.standalone_epochs, ctx.config.seed, ctx.config.retrain.batch_size);
  analysis::ConsistencyConfig cc;
  cc.k = ctx.config.consistency.k;
  cc.standalone_epochs = ctx.config.consistency.standalone_epochs;
  cc.seed = ctx.config.seed;
  cc.workers = workers(ctx.config);
  const auto report = analysis::consistency_eval(evaluator, loaded.candidates, standalone, cc);
  write_json(ctx.out.path("consistency.json"), analysis::to_json(report));
  spdlog::info("consistency: Kendall tau (AUC) {:.4f} over {} subnets", report.tau_auc, report.k);
}

void stage_stability(Context& ctx) {
  const auto split = load_data(ctx);
  const auto loaded = load_supernet(ctx, split.schema);
  const auto config = search_config(ctx.config);
  const search::SubnetEvaluator evaluator(loaded.net, split.validation, config.evaluator);
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < ctx.config.stability.runs; ++r) seeds.push_back(mix_seed(ctx.config.seed, r));
  const auto report = analysis::stability_eval(
      [&](std::uint64_t s) { return search::run_search(evaluator, loaded.candidates, config, s).sizes; },
      split.schema, loaded.candidates, seeds, workers(ctx.config));
  write_text(ctx.out.path("stability.csv"), analysis::stability_csv(report));
  write_json(ctx.out.path("stability.json"), analysis::to_json(report));
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
  } else if (j.is_number() || j.is_boolean() || j.is_string()) {
    rows.emplace_back(prefix, j);
  }
}

void stage_report(Context& ctx) {
  const auto& dirs = ctx.request.inputs.report_dirs;
  if (dirs.empty()) throw ConfigError("report needs at least one stage output directory");
  json runs = json::array();
  std::ostringstream csv;
  csv << "dir,artifact,metric,value\n";
  for (const auto& dir : dirs) {
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    json entry = {{"dir", dir.string()}};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json" && e.path().filename() != "config.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto name = f.stem().string();
      json j = read_json(f);
      if (name != "manifest") {
        std::vector<std::pair<std::string, json>> rows;
        flatten(j, "", rows);
        for (const auto& [metric, value] : rows) {
          csv << dir.string() << ',' << name << ',' << metric << ',';
          csv << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
        }
      }
      entry[name] = std::move(j);
    }
    runs.push_back(std::move(entry));
  }
  write_json(ctx.out.path("report.json"), {{"runs", runs}});
  write_text(ctx.out.path("report.csv"), csv.str());
}

std::map<std::string, std::string> checksum_inputs(const StageRequest& r, const RunConfig& c) {
  std::vector<fs::path> paths;
  const auto add = [&](const std::optional<fs::path>& p, const fs::path& fallback) {
    if (p) paths.push_back(*p);
    else if (fs::exists(fallback)) paths.push_back(fallback);
  };
  if (r.stage != "synth" && r.stage != "prep" && r.stage != "report") {
    add(r.inputs.data, c.out / "split.bin");
    if (r.stage != "train-supernet" && r.stage != "baseline") {
      if (r.stage != "retrain") add(r.inputs.supernet, c.out / "supernet.ckpt");
      else if (r.inputs.supernet) paths.push_back(*r.inputs.supernet);
    }
    if (r.stage == "retrain") add(r.inputs.assignment, c.out / "assignment.json");
  }
  std::map<std::string, std::string> sums;
  for (const auto& p : paths)
    if (fs::is_regular_file(p)) sums[p.string()] = file_checksum(p);
  return sums;
}

}  // namespace

std::string build_id() { return EMBSIZER_BUILD_ID; }

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a(buf.data(), static_cast<std::size_t>(in.gcount()), h);
  }
  return hex(h);
}

void run_stage(const StageRequest& request) {
  const auto& stages = stage_names();
  if (std::find(stages.begin(), stages.end(), request.stage) == stages.end())
    throw ConfigError("unknown stage '" + request.stage + "'");
  const RunConfig& config = request.config;
  config.validate();
  fs::create_directories(config.out);
  Outputs out(config.out);
  write_json(out.path("config.json"), run_config_to_json(config));

  const auto inputs = checksum_inputs(request, config);
  spdlog::info("stage {} -> {}", request.stage, config.out.string());
  const auto start = std::chrono::steady_clock::now();
  Context ctx{request, config, out};
  if (request.stage == "synth") stage_synth(ctx);
  else if (request.stage == "prep") stage_prep(ctx);
  else if (request.stage == "train-supernet") stage_train_supernet(ctx);
  else if (request.stage == "search") stage_search(ctx);
  else if (request.stage == "retrain") stage_retrain(ctx);
  else if (request.stage == "baseline") stage_baseline(ctx);
  else if (request.stage == "consistency") stage_consistency(ctx);
  else if (request.stage == "stability") stage_stability(ctx);
  else stage_report(ctx);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const auto& [path, sum] : inputs) {
    if (file_checksum(path) != sum) throw FormatError("input " + path + " changed while stage " + request.stage + " ran");
  }
  auto names = out.names();
  names.push_back("manifest.json");
  write_json(out.path("manifest.json"), {{"stage", request.stage},
                                         {"seed", config.seed},
                                         {"build_id", build_id()},
                                         {"command", request.command_line},
                                         {"config_hash", config_hash(config)},
                                         {"inputs", inputs},
                                         {"outputs", names},
                                         {"seconds", seconds}});
}

json error_record(const std::exception& e, const std::string& stage) {
  const auto* err = dynamic_cast<const Error*>(&e);
  return {{"error", {{"kind", err != nullptr ? err->kind() : "internal"}, {"message", e.what()}, {"stage", stage}}}};
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const FormatError*>(&e)) return 4;
  if (dynamic_cast<const NumericError*>(&e)) return 5;
  if (dynamic_cast<const MetricError*>(&e)) return 6;
  return 1;
}

}  // namespace embsizer::cli
