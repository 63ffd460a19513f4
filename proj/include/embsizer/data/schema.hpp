#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace embsizer::data {

struct FieldSchema {
  std::string name;
  std::uint32_t cardinality = 1;
  bool multi_valued = false;

  friend bool operator==(const FieldSchema&, const FieldSchema&) = default;
};

using Schema = std::vector<FieldSchema>;

// Cardinality >= 1 and unique names; throws ConfigError otherwise.
void validate_schema(const Schema& schema);

// FNV-1a over names, cardinalities and multi-valued flags. Checkpoints carry
// it so that a model is never paired with a differently shaped dataset.
std::uint64_t schema_hash(const Schema& schema);
std::string schema_hash_hex(const Schema& schema);

nlohmann::json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j);

}  // namespace embsizer::data
