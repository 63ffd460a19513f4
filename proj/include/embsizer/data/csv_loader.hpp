#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embsizer/data/dataset.hpp"

namespace embsizer::data {

struct CsvFieldConfig {
  std::string column;
  bool multi_valued = false;  // cells hold '|'-separated values
  bool numeric = false;       // bucketized with equal-frequency boundaries
  std::size_t buckets = 32;
};

struct CsvConfig {
  std::string label_column;
  std::optional<std::string> timestamp_column;
  std::vector<CsvFieldConfig> fields;
  SplitRatios ratios;
  char delimiter = ',';
};

CsvConfig csv_config_from_json(const nlohmann::json& j);
nlohmann::json csv_config_to_json(const CsvConfig& c);

// Reads a headered CSV. Rows are ordered by (timestamp, line) when a
// timestamp column is configured, then split by ratio. Vocabularies and
// bucket boundaries are fitted on the training split only; categorical
// values unseen there map to index 0. Numeric fields use index 0 for empty
// cells and 1 + bucket otherwise.
DatasetSplit load_csv(const std::filesystem::path& path, const CsvConfig& config);

// Writes a split back out as a CSV that `load_csv` reads with the returned
// config (raw values taken from the vocabularies).
CsvConfig write_csv(const std::filesystem::path& path, const DatasetSplit& split);

}  // namespace embsizer::data
