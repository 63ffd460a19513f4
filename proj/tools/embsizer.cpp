#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "embsizer/cli/run_config.hpp"
#include "embsizer/cli/stages.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("embsizer");
  spdlog::set_default_logger(logger);
  const char* level = std::getenv("EMBSIZER_LOG");
  spdlog::set_level(level != nullptr ? spdlog::level::from_str(level) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  std::string command_line;
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Embedding size search for recommender models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  embsizer::cli::Overrides overrides;
  embsizer::cli::StageInputs inputs;
  std::string data, supernet, assignment;
  std::vector<std::string> report_dirs;

  app.add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", overrides.seed, "Master seed");
  app.add_option("--out", overrides.out, "Output directory");
  app.add_option("--scheme", overrides.scheme, "Supernet scheme")->check(CLI::IsMember({"independent", "shared"}));
  app.add_option("--sampler", overrides.sampler, "Supernet sampler")
      ->check(CLI::IsMember({"adaptive", "random", "vanilla", "weight"}));
  app.add_option("--mode", overrides.mode, "Penalty preset")->check(CLI::IsMember({"effect", "resource"}));
  app.add_option("--lambda-r", overrides.lambda_r, "Resource penalty weight");
  app.add_option("--lambda-c", overrides.lambda_c, "Competition penalty weight");
  app.add_option("--workers", overrides.workers, "Worker threads (0 = all cores)");

  const std::map<std::string, std::string> about{
      {"synth", "Generate a synthetic dataset and split cache"},
      {"prep", "Load a CSV or MovieLens dataset into a split cache"},
      {"train-supernet", "Train the supernet with the configured sampler"},
      {"search", "Search embedding sizes on a trained supernet"},
      {"retrain", "Train a fresh model with a searched assignment"},
      {"baseline", "Train uniform-size baselines"},
      {"consistency", "Kendall tau between supernet and stand-alone rankings"},
      {"stability", "Repeat the search and report per-field size frequencies"},
      {"report", "Summarize stage output directories"}};
  for (const auto& name : embsizer::cli::stage_names()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    if (name != "synth" && name != "prep" && name != "report") {
      sub->add_option("--data", data, "Split cache written by synth or prep")->check(CLI::ExistingFile);
    }
    if (name == "search" || name == "retrain" || name == "consistency" || name == "stability") {
      sub->add_option("--supernet", supernet, "Supernet checkpoint")->check(CLI::ExistingFile);
    }
    if (name == "retrain") {
      sub->add_option("--assignment", assignment, "Assignment JSON written by search")->check(CLI::ExistingFile);
    }
    if (name == "baseline") sub->add_option("--ues", inputs.ues, "Uniform embedding sizes");
    if (name == "report") sub->add_option("dirs", report_dirs, "Stage output directories")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  std::filesystem::path out_dir = overrides.out.value_or("");
  try {
    embsizer::cli::RunConfig config =
        config_path.empty() ? embsizer::cli::RunConfig{} : embsizer::cli::load_run_config(config_path);
    embsizer::cli::apply_overrides(config, overrides);
    out_dir = config.out;
    if (!data.empty()) inputs.data = data;
    if (!supernet.empty()) inputs.supernet = supernet;
    if (!assignment.empty()) inputs.assignment = assignment;
    for (const auto& d : report_dirs) inputs.report_dirs.emplace_back(d);
    embsizer::cli::run_stage({stage, config, inputs, command_line});
  } catch (const std::exception& e) {
    const auto record = embsizer::cli::error_record(e, stage);
    std::cerr << record.dump() << std::endl;
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      std::ofstream(out_dir / "error.json") << record.dump(2) << "\n";
    }
    return embsizer::cli::exit_code(e);
  }
  return 0;
}
