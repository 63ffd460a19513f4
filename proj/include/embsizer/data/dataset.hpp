#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "embsizer/data/sample_table.hpp"
#include "embsizer/data/schema.hpp"

namespace embsizer::data {

struct SplitRatios {
  double train = 8.0;
  double validation = 1.0;
  double test = 1.0;
};

struct DatasetSplit {
  Schema schema;
  // Per field, index -> raw value; index 0 is the reserved OOV slot for
  // loaded data. Empty for synthetic data.
  std::vector<std::vector<std::string>> vocabularies;
  SampleTable train;
  SampleTable validation;
  SampleTable test;
};

// Train / validation / test sizes for n rows: floor(n * r_train / total),
// floor(n * r_val / total), remainder.
struct SplitSizes {
  std::size_t train, validation, test;
};
SplitSizes split_sizes(std::size_t n, const SplitRatios& ratios);

// Stable sort by timestamp (ties keep input order), then cut by ratios.
void chronological_split(const SampleTable& all, const SplitRatios& ratios, SampleTable& train,
                         SampleTable& validation, SampleTable& test);

// Split cache in the versioned binary container.
void write_split(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit read_split(const std::filesystem::path& path);

}  // namespace embsizer::data
