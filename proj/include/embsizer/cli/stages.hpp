#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/cli/run_config.hpp"

namespace embsizer::cli {

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"synth",    "prep",        "train-supernet", "search", "retrain",
                                              "baseline", "consistency", "stability",      "report"};
  return names;
}

// Artifacts handed over from earlier stages.
struct StageInputs {
  std::optional<std::filesystem::path> data;        // split cache (split.bin)
  std::optional<std::filesystem::path> supernet;    // supernet checkpoint
  std::optional<std::filesystem::path> assignment;  // assignment JSON
  std::vector<std::size_t> ues;                     // baseline sizes; empty = config
  std::vector<std::filesystem::path> report_dirs;
};

struct StageRequest {
  std::string stage;
  RunConfig config;
  StageInputs inputs;
  std::string command_line;
};

// Runs one stage into config.out. Every output directory gets config.json
// (resolved config) and manifest.json (stage, seed, build id, input
// checksums, outputs). Inputs are checksummed before and after the stage;
// a change raises FormatError. Throws on any failure.
void run_stage(const StageRequest& request);

// {"error": {"kind", "message", "stage"}} for the machine-readable record.
nlohmann::json error_record(const std::exception& e, const std::string& stage);
// 2 config, 3 data, 4 format, 5 numeric, 6 metric, 1 anything else.
int exit_code(const std::exception& e);

std::string build_id();
// FNV-1a over the file bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace embsizer::cli
